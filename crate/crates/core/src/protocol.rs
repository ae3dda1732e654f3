//! Serial wire protocol.
//!
//! Host to device: the byte `0x30 + n` selects port `n`, so `'1'..='9'` on a
//! nine-port switch. With extensions enabled `'?'` asks for the current
//! state. Every other byte is ignored.
//!
//! Device to host, extensions only: `S<n>\n` answers a query and `E<n>\n`
//! reports a selection made at the panel. `n` is encoded the same way as a
//! command byte; `S0\n` means nothing is selected. Legacy mode never writes.

pub const QUERY_BYTE: u8 = b'?';

/// Port numbers are carried as `0x30 + n`.
pub fn port_byte(port: u8) -> u8 {
    b'0' + port
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Command {
    Select(u8),
    Query,
    Noop,
}

pub fn parse_serial_byte(b: u8, n_ports: u8, extensions: bool) -> Command {
    if extensions && b == QUERY_BYTE {
        return Command::Query;
    }
    match b.checked_sub(b'0') {
        Some(n) if n >= 1 && n <= n_ports => Command::Select(n),
        _ => Command::Noop,
    }
}

fn line(tag: u8, selected: Option<u8>) -> Vec<u8> {
    vec![tag, port_byte(selected.unwrap_or(0)), b'\n']
}

/// `S<n>\n`, the reply to a query.
pub fn render_state_line(selected: Option<u8>) -> Vec<u8> {
    line(b'S', selected)
}

/// `E<n>\n`, pushed when a panel button changes the selection.
pub fn render_event_line(selected: Option<u8>) -> Vec<u8> {
    line(b'E', selected)
}

/// A parsed device-to-host line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reply {
    State(u8),
    Event(u8),
}

/// Parses one line without its trailing newline. Returns `None` for anything
/// that is not a well-formed `S<n>` or `E<n>`.
pub fn parse_reply_line(line: &[u8]) -> Option<Reply> {
    let line = line.strip_suffix(b"\r").unwrap_or(line);
    match line {
        [tag, n] if *n >= b'0' => {
            let n = n - b'0';
            match tag {
                b'S' => Some(Reply::State(n)),
                b'E' => Some(Reply::Event(n)),
                _ => None,
            }
        }
        _ => None,
    }
}
