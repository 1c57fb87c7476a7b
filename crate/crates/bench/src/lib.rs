//! Shared fixtures for the criterion benches.

use std::sync::{Arc, Mutex};

use wia_core::node::AppNode;
use wia_core::{Allowlist, LinkConfig, MacAddress, SimRadio};

/// An allowlist of `n` distinct MACs, plus one MAC known to be absent.
pub fn allowlist_of(n: u16) -> (Allowlist, MacAddress) {
    let al = (0..n)
        .map(|i| {
            let [hi, lo] = i.to_be_bytes();
            (MacAddress::new([0x02, 0, 0, 0, hi, lo]), format!("dev{i}"))
        })
        .collect();
    (al, MacAddress::new([0x06, 0xFF, 0xFF, 0xFF, 0xFF, 0xFF]))
}

/// Lossless radio with a fresh node attached.
pub fn lossless_radio() -> SimRadio {
    SimRadio::new(LinkConfig::default(), Arc::new(Mutex::new(AppNode::new())))
        .expect("default link config is valid")
}
