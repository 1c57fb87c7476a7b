//! Allowlist persistence and the audit trail.

pub mod allowlist_file;
pub mod audit;

pub use allowlist_file::{
    is_valid_label, load_allowlist, parse_allowlist, render_allowlist, save_allowlist,
    save_allowlist_with_hook, AllowlistError, ParseReason,
};
pub use audit::{
    append_audit, parse_audit_line, read_audit, AuditError, AuditFilter, AuditKind, AuditRecord,
    AuditWriter,
};
