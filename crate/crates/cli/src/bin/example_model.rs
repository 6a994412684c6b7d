//! Reference external model speaking the `SBALC/1` line protocol.
//!
//! ```text
//! sbalc-example-model <example1|example2|flat> [--obs-seed N] [--dim D]
//!                     [--error-above T] [--wrong-handshake] [--sleep-ms MS]
//! ```
//!
//! `--error-above T` answers `ERROR bad x` whenever the first coordinate
//! exceeds `T`; `--wrong-handshake` echoes a different dimension;
//! `--sleep-ms` delays every reply.

use std::io::{self, BufRead, Write};
use std::process::ExitCode;
use std::time::Duration;

use sbalc_cli::protocol::{handshake_line, parse_request, PROTOCOL};
use sbalc_core::benchmarks::{Example1, Example2, Flat, LogLikelihood};

struct Options {
    model: Box<dyn LogLikelihood>,
    error_above: Option<f64>,
    wrong_handshake: bool,
    sleep: Option<Duration>,
}

fn parse_args() -> Result<Options, String> {
    let mut args = std::env::args().skip(1);
    let name = args.next().ok_or("missing model name")?;
    let (mut obs_seed, mut dim, mut error_above, mut wrong_handshake, mut sleep) = (0u64, 1usize, None, false, None);
    while let Some(a) = args.next() {
        let mut value = |flag: &str| args.next().ok_or(format!("{flag} needs a value"));
        match a.as_str() {
            "--obs-seed" => obs_seed = value("--obs-seed")?.parse().map_err(|e| format!("--obs-seed: {e}"))?,
            "--dim" => dim = value("--dim")?.parse().map_err(|e| format!("--dim: {e}"))?,
            "--error-above" => error_above = Some(value("--error-above")?.parse().map_err(|e| format!("--error-above: {e}"))?),
            "--sleep-ms" => {
                let ms: u64 = value("--sleep-ms")?.parse().map_err(|e| format!("--sleep-ms: {e}"))?;
                sleep = Some(Duration::from_millis(ms));
            }
            "--wrong-handshake" => wrong_handshake = true,
            other => return Err(format!("unknown argument {other:?}")),
        }
    }
    let model: Box<dyn LogLikelihood> = match name.as_str() {
        "example1" => Box::new(Example1),
        "example2" => Box::new(Example2::from_seed(obs_seed)),
        "flat" => Box::new(Flat { dim }),
        other => return Err(format!("unknown model {other:?}")),
    };
    Ok(Options { model, error_above, wrong_handshake, sleep })
}

fn serve(mut opts: Options) -> io::Result<()> {
    let stdin = io::stdin();
    let mut out = io::stdout().lock();
    let mut lines = stdin.lock().lines();
    let dim = opts.model.dim();

    let Some(hello) = lines.next().transpose()? else { return Ok(()) };
    if hello.trim_end() != handshake_line(dim) {
        eprintln!("sbalc-example-model: unexpected handshake {hello:?}");
    }
    let echoed = if opts.wrong_handshake { format!("{PROTOCOL} {}", dim + 1) } else { handshake_line(dim) };
    writeln!(out, "{echoed}")?;
    out.flush()?;

    for line in lines {
        let line = line?;
        if let Some(d) = opts.sleep {
            std::thread::sleep(d);
        }
        let reply = match parse_request(&line, dim) {
            Err(e) => format!("ERROR {e}"),
            Ok(x) if opts.error_above.is_some_and(|t| x[0] > t) => "ERROR bad x".to_string(),
            Ok(x) => match opts.model.log_likelihood(&x) {
                Ok(v) => v.to_string(),
                Err(e) => format!("ERROR {e}"),
            },
        };
        writeln!(out, "{reply}")?;
        out.flush()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let opts = match parse_args() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("sbalc-example-model: {e}");
            return ExitCode::from(64);
        }
    };
    match serve(opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sbalc-example-model: {e}");
            ExitCode::from(74)
        }
    }
}
