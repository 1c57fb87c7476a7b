//! Shared domain vocabulary: MAC addresses, devices, commands and ack codes.
//!
//! Every other module, the allowlist file, the audit log and the control API
//! use the textual forms defined here:
//!
//! - MAC addresses are stored and emitted as six uppercase hex pairs joined
//!   by `:` (17 characters). Input also accepts `-` and lowercase.
//! - Commands travel as `<device>_<on|off>` tokens, e.g. `led1_on`.
//! - Ack codes are `device_index * 10 + action_bit`, e.g. `11` for LED1 on.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("malformed MAC address: {0}")]
    MalformedMac(String),
    #[error("unknown command: {0}")]
    UnknownCommand(String),
    #[error("invalid ack code: {0}")]
    InvalidAckCode(String),
}

/// A 48-bit hardware address, most significant octet first.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MacAddress([u8; 6]);

impl MacAddress {
    pub const fn new(octets: [u8; 6]) -> Self {
        Self(octets)
    }

    pub const fn octets(&self) -> [u8; 6] {
        self.0
    }
}

/// Parses six hex pairs separated by `:` or `-`, in any letter case.
///
/// Mixed separators (`AA:BB-CC...`) are rejected.
pub fn parse_mac(text: &str) -> Result<MacAddress, ModelError> {
    let malformed = || ModelError::MalformedMac(text.to_string());
    let sep = if text.contains(':') { ':' } else { '-' };
    let mut octets = [0u8; 6];
    let mut groups = text.split(sep);
    for slot in octets.iter_mut() {
        let group = groups.next().ok_or_else(malformed)?;
        if group.len() != 2 || !group.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(malformed());
        }
        *slot = u8::from_str_radix(group, 16).map_err(|_| malformed())?;
    }
    if groups.next().is_some() {
        return Err(malformed());
    }
    Ok(MacAddress(octets))
}

pub fn format_mac(mac: &MacAddress) -> String {
    mac.to_string()
}

impl fmt::Display for MacAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let o = self.0;
        write!(
            f,
            "{:02X}:{:02X}:{:02X}:{:02X}:{:02X}:{:02X}",
            o[0], o[1], o[2], o[3], o[4], o[5]
        )
    }
}

impl fmt::Debug for MacAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MacAddress({self})")
    }
}

impl FromStr for MacAddress {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_mac(s)
    }
}

impl Serialize for MacAddress {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MacAddress {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_mac(&text).map_err(serde::de::Error::custom)
    }
}

/// The three end-operation devices on the application node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DeviceId {
    Led1,
    Led2,
    Motor,
}

impl DeviceId {
    pub const ALL: [DeviceId; 3] = [DeviceId::Led1, DeviceId::Led2, DeviceId::Motor];

    pub const fn wire_name(self) -> &'static str {
        match self {
            DeviceId::Led1 => "led1",
            DeviceId::Led2 => "led2",
            DeviceId::Motor => "motor",
        }
    }

    pub const fn index(self) -> u8 {
        match self {
            DeviceId::Led1 => 1,
            DeviceId::Led2 => 2,
            DeviceId::Motor => 3,
        }
    }

    /// Name used in the receiver log, e.g. `LED1`.
    pub const fn display_name(self) -> &'static str {
        match self {
            DeviceId::Led1 => "LED1",
            DeviceId::Led2 => "LED2",
            DeviceId::Motor => "MOTOR",
        }
    }

    pub fn from_wire_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.wire_name() == name)
    }

    pub fn from_index(index: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.index() == index)
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.wire_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Off = 0,
    On = 1,
}

impl Action {
    pub const fn bit(self) -> u8 {
        self as u8
    }

    pub const fn token(self) -> &'static str {
        match self {
            Action::On => "on",
            Action::Off => "off",
        }
    }

    pub const fn from_bit(bit: bool) -> Self {
        if bit {
            Action::On
        } else {
            Action::Off
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Command {
    pub device: DeviceId,
    pub action: Action,
}

impl Command {
    pub const fn new(device: DeviceId, action: Action) -> Self {
        Self { device, action }
    }

    /// The six commands the node understands.
    pub fn vocabulary() -> impl Iterator<Item = Command> + Clone {
        DeviceId::ALL
            .into_iter()
            .flat_map(|d| [Command::new(d, Action::On), Command::new(d, Action::Off)])
    }
}

pub fn encode_command(cmd: Command) -> String {
    format!("{}_{}", cmd.device.wire_name(), cmd.action.token())
}

pub fn decode_command(token: &str) -> Result<Command, ModelError> {
    let unknown = || ModelError::UnknownCommand(token.to_string());
    let (device, action) = token.split_once('_').ok_or_else(unknown)?;
    let device = DeviceId::from_wire_name(device).ok_or_else(unknown)?;
    let action = match action {
        "on" => Action::On,
        "off" => Action::Off,
        _ => return Err(unknown()),
    };
    Ok(Command::new(device, action))
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.device.wire_name(), self.action.token())
    }
}

impl FromStr for Command {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        decode_command(s)
    }
}

impl Serialize for Command {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Command {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        decode_command(&text).map_err(serde::de::Error::custom)
    }
}

/// Two-digit acknowledgment echoed by the node: tens digit is the device
/// index, units digit the resulting state bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct AckCode(u8);

impl AckCode {
    pub const fn value(self) -> u8 {
        self.0
    }

    /// Accepts only codes produced by [`ack_code`] for some command.
    pub fn from_value(code: u8) -> Option<Self> {
        let device = DeviceId::from_index(code / 10)?;
        let action = match code % 10 {
            0 => Action::Off,
            1 => Action::On,
            _ => return None,
        };
        Some(ack_code(Command::new(device, action)))
    }

    pub fn command(self) -> Command {
        let device = DeviceId::from_index(self.0 / 10).expect("validated on construction");
        Command::new(device, Action::from_bit(self.0 % 10 == 1))
    }
}

impl fmt::Display for AckCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for AckCode {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || ModelError::InvalidAckCode(s.to_string());
        if s.len() != 2 || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(invalid());
        }
        let value: u8 = s.parse().map_err(|_| invalid())?;
        AckCode::from_value(value).ok_or_else(invalid)
    }
}

pub const fn ack_code(cmd: Command) -> AckCode {
    AckCode(cmd.device.index() * 10 + cmd.action.bit())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cmd(device: DeviceId, action: Action) -> Command {
        Command::new(device, action)
    }

    #[test]
    fn parses_canonical_mac() {
        let mac = parse_mac("AA:BB:CC:DD:EE:FF").unwrap();
        assert_eq!(mac.octets(), [0xAA, 0xBB, 0xCC, 0xDD, 0xEE, 0xFF]);
        assert_eq!(parse_mac("00:00:00:00:00:00").unwrap().octets(), [0; 6]);
    }

    #[test]
    fn normalizes_dash_and_lowercase() {
        let mac = parse_mac("aa-bb-cc-dd-ee-ff").unwrap();
        assert_eq!(mac, parse_mac("AA:BB:CC:DD:EE:FF").unwrap());
        assert_eq!(format_mac(&mac), "AA:BB:CC:DD:EE:FF");
    }

    #[test]
    fn rejects_malformed_macs() {
        for bad in [
            "AA:BB:CC:DD:EE",
            "AA:BB:CC:DD:EE:FF:00",
            "AA:BB:CC:DD:EE:GG",
            "AAA:BB:CC:DD:EE:F",
            "A:BB:CC:DD:EE:FF",
            "AA:BB-CC:DD:EE:FF",
            "AABBCCDDEEFF",
            "",
            "not-a-mac",
            "+A:BB:CC:DD:EE:FF",
            "AA:BB:CC:DD:EE:FF ",
        ] {
            assert!(
                matches!(parse_mac(bad), Err(ModelError::MalformedMac(_))),
                "{bad:?} accepted"
            );
        }
    }

    #[test]
    fn formats_mac() {
        assert_eq!(format_mac(&MacAddress::new([0; 6])), "00:00:00:00:00:00");
        let mac = MacAddress::new([0x01, 0x23, 0x45, 0x67, 0x89, 0xAB]);
        assert_eq!(format_mac(&mac), "01:23:45:67:89:AB");
    }

    #[test]
    fn command_tokens() {
        assert_eq!(encode_command(cmd(DeviceId::Led1, Action::On)), "led1_on");
        assert_eq!(encode_command(cmd(DeviceId::Motor, Action::On)), "motor_on");
        assert_eq!(encode_command(cmd(DeviceId::Led1, Action::Off)), "led1_off");
        assert_eq!(encode_command(cmd(DeviceId::Led2, Action::Off)), "led2_off");

        assert_eq!(
            decode_command("led2_on").unwrap(),
            cmd(DeviceId::Led2, Action::On)
        );
        assert_eq!(
            decode_command("motor_off").unwrap(),
            cmd(DeviceId::Motor, Action::Off)
        );
        for bad in [
            "led3_on", "led9_up", "LED1_ON", "led1on", "led1_on_", "_on", "",
        ] {
            assert!(matches!(
                decode_command(bad),
                Err(ModelError::UnknownCommand(_))
            ));
        }
    }

    #[test]
    fn command_vocabulary_round_trips() {
        let all: Vec<_> = Command::vocabulary().collect();
        assert_eq!(all.len(), 6);
        for c in all {
            assert_eq!(decode_command(&encode_command(c)).unwrap(), c);
        }
    }

    #[test]
    fn ack_codes_match_receiver_transcript() {
        assert_eq!(ack_code(cmd(DeviceId::Led1, Action::On)).value(), 11);
        assert_eq!(ack_code(cmd(DeviceId::Led1, Action::Off)).value(), 10);
        assert_eq!(ack_code(cmd(DeviceId::Motor, Action::On)).value(), 31);
        assert_eq!(ack_code(cmd(DeviceId::Led2, Action::On)).value(), 21);
        assert_eq!(ack_code(cmd(DeviceId::Led2, Action::Off)).value(), 20);
        assert_eq!(ack_code(cmd(DeviceId::Motor, Action::Off)).value(), 30);
    }

    #[test]
    fn ack_codes_are_injective_and_decodable() {
        let codes: std::collections::HashSet<u8> =
            Command::vocabulary().map(|c| ack_code(c).value()).collect();
        assert_eq!(codes.len(), 6);
        for c in Command::vocabulary() {
            let code = ack_code(c);
            assert_eq!(code.value() / 10, c.device.index());
            assert_eq!(code.value() % 10, c.action.bit());
            assert_eq!(code.command(), c);
            assert_eq!(code.to_string().parse::<AckCode>().unwrap(), code);
        }
        for v in [0u8, 9, 12, 19, 40, 41, 99] {
            assert!(AckCode::from_value(v).is_none());
        }
    }

    #[test]
    fn device_naming_is_bijective() {
        for d in DeviceId::ALL {
            assert_eq!(DeviceId::from_wire_name(d.wire_name()), Some(d));
            assert_eq!(DeviceId::from_index(d.index()), Some(d));
            assert_eq!(d.display_name(), d.wire_name().to_uppercase());
        }
    }

    fn mac_text() -> impl Strategy<Value = (String, [u8; 6])> {
        (
            any::<[u8; 6]>(),
            any::<bool>(),
            prop::collection::vec(any::<bool>(), 12),
        )
            .prop_map(|(octets, dash, upper)| {
                let sep = if dash { "-" } else { ":" };
                let hex: String = octets.iter().map(|o| format!("{o:02x}")).collect();
                let chars: Vec<char> = hex
                    .chars()
                    .zip(upper)
                    .map(|(c, u)| if u { c.to_ascii_uppercase() } else { c })
                    .collect();
                let groups: Vec<String> = chars.chunks(2).map(|p| p.iter().collect()).collect();
                (groups.join(sep), octets)
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100_000))]
        #[test]
        fn mac_round_trip((text, octets) in mac_text()) {
            let mac = parse_mac(&text).unwrap();
            prop_assert_eq!(mac.octets(), octets);
            let canonical = text.replace('-', ":").to_uppercase();
            prop_assert_eq!(format_mac(&mac), canonical);
            prop_assert_eq!(parse_mac(&format_mac(&mac)).unwrap(), mac);
        }
    }

    proptest! {
        #[test]
        fn parse_rejects_non_canonicalizable(s in "\\PC{0,24}") {
            if let Ok(mac) = parse_mac(&s) {
                prop_assert_eq!(s.replace('-', ":").to_uppercase(), format_mac(&mac));
                prop_assert_eq!(s.len(), 17);
            }
        }
    }
}
