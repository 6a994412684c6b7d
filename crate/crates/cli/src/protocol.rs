//! Line protocol for external log-likelihood models.
//!
//! The engine starts the model once and talks over its stdin/stdout:
//!
//! ```text
//! engine -> model   SBALC/1 <d>
//! model  -> engine  SBALC/1 <d>          (echo; anything else aborts)
//! engine -> model   <x_1> <x_2> ... <x_d>
//! model  -> engine  <log-likelihood>     or   ERROR <message>
//! ```
//!
//! Values are written in shortest round-trip decimal form, so a model that
//! parses and prints `f64` the same way reproduces builtin runs bit for bit.
//! Each reply must arrive within the configured timeout. stderr is inherited.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use sbalc_core::benchmarks::{LogLikelihood, ModelMetadata};
use sbalc_core::Error;

use crate::error::CliError;

pub const PROTOCOL: &str = "SBALC/1";

pub fn handshake_line(dim: usize) -> String {
    format!("{PROTOCOL} {dim}")
}

/// Space-separated request line, without the newline.
pub fn format_request(x: &[f64]) -> String {
    x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

/// Parses a request line into exactly `dim` values.
pub fn parse_request(line: &str, dim: usize) -> Result<Vec<f64>, String> {
    let x = line
        .split_ascii_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| format!("bad number {t:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    if x.len() != dim {
        return Err(format!("expected {dim} values, got {}", x.len()));
    }
    Ok(x)
}

/// Reply payload: a value, or the model's error message.
pub fn parse_reply(line: &str) -> Result<std::result::Result<f64, String>, String> {
    let line = line.trim_end_matches(['\r', '\n']);
    if let Some(rest) = line.strip_prefix("ERROR") {
        if rest.is_empty() || rest.starts_with(' ') {
            return Ok(Err(rest.trim_start().to_string()));
        }
    }
    line.trim().parse::<f64>().map(Ok).map_err(|_| format!("malformed reply {line:?}"))
}

pub struct ExternalModel {
    name: String,
    dim: usize,
    timeout: Duration,
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
}

impl ExternalModel {
    /// Spawns `command` and performs the handshake.
    pub fn spawn(command: &[String], dim: usize, timeout_s: f64) -> Result<Self, CliError> {
        let (program, args) = command.split_first().ok_or_else(|| CliError::Config("empty model command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| CliError::Model(format!("cannot start {program:?}: {e}")))?;
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let failed = line.is_err();
                if tx.send(line).is_err() || failed {
                    break;
                }
            }
        });
        let mut model = Self {
            name: command.join(" "),
            dim,
            timeout: Duration::from_secs_f64(timeout_s),
            stdin: child.stdin.take(),
            child,
            lines: rx,
        };
        let hello = handshake_line(dim);
        let reply = model.exchange(&hello).map_err(CliError::Model)?;
        if reply.trim_end() != hello {
            model.shutdown();
            return Err(CliError::Model(format!("handshake mismatch: sent {hello:?}, model replied {reply:?}")));
        }
        Ok(model)
    }

    fn exchange(&mut self, line: &str) -> Result<String, String> {
        let stdin = self.stdin.as_mut().ok_or("model stdin is closed")?;
        writeln!(stdin, "{line}").and_then(|_| stdin.flush()).map_err(|e| format!("write to model failed: {e}"))?;
        match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(reply)) => Ok(reply),
            Ok(Err(e)) => Err(format!("read from model failed: {e}")),
            Err(RecvTimeoutError::Timeout) => {
                self.shutdown();
                Err(format!("no reply within {:?}", self.timeout))
            }
            Err(RecvTimeoutError::Disconnected) => {
                let status = self.child.wait().map(|s| s.to_string()).unwrap_or_else(|e| e.to_string());
                Err(format!("model exited ({status})"))
            }
        }
    }

    fn shutdown(&mut self) {
        self.stdin.take();
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl LogLikelihood for ExternalModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn log_likelihood(&mut self, x: &[f64]) -> sbalc_core::Result<f64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let fail = |message: String| Error::ModelEvaluation { x: x.to_vec(), message };
        let reply = self.exchange(&format_request(x)).map_err(fail)?;
        match parse_reply(&reply).map_err(fail)? {
            Ok(v) => Ok(v),
            Err(msg) => Err(fail(format!("model reported: {msg}"))),
        }
    }

    fn metadata(&self) -> ModelMetadata {
        ModelMetadata { name: self.name.clone(), ..Default::default() }
    }
}

impl Drop for ExternalModel {
    fn drop(&mut self) {
        // Closing stdin lets a well-behaved model exit on EOF.
        self.stdin.take();
        match self.child.try_wait() {
            Ok(Some(_)) => {}
            _ => {
                thread::sleep(Duration::from_millis(20));
                if !matches!(self.child.try_wait(), Ok(Some(_))) {
                    let _ = self.child.kill();
                }
                let _ = self.child.wait();
            }
        }
    }
}
