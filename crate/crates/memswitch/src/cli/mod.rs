pub mod ctl;
pub mod sim;

/// Process exit codes shared by both tools.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const IO: i32 = 3;
}
