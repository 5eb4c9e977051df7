use std::fmt;
use std::io::{self, Write};

/// Writes to stdout; a closed pipe ends the process quietly.
pub fn emit(args: fmt::Arguments<'_>) {
    if let Err(e) = io::stdout().lock().write_fmt(args) {
        if e.kind() == io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

macro_rules! out {
    ($($arg:tt)*) => {
        $crate::output::emit(format_args!($($arg)*))
    };
}

macro_rules! outln {
    () => {
        $crate::output::emit(format_args!("\n"))
    };
    ($($arg:tt)*) => {{
        $crate::output::emit(format_args!($($arg)*));
        $crate::output::emit(format_args!("\n"));
    }};
}
