//! Response model backed by an external process.
//!
//! Protocol: the process receives one line per point on stdin, the x
//! coordinates as comma-separated decimals, and must answer with one decimal
//! per line on stdout in the same order. Stdin is closed after the last
//! point. With several workers, the batch is split into contiguous slices,
//! one process per slice, and the outputs are reassembled in order.

use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use super::ResponseModel;
use crate::error::{Error, Result};
use crate::types::Points;

#[derive(Clone, Debug)]
pub struct ExternalModel {
    pub program: String,
    pub args: Vec<String>,
    pub dim: usize,
    pub workers: usize,
    /// Wall-clock limit for each process.
    pub timeout: Duration,
}

impl ExternalModel {
    pub fn new(program: impl Into<String>, args: Vec<String>, dim: usize) -> Self {
        Self {
            program: program.into(),
            args,
            dim,
            workers: 1,
            timeout: Duration::from_secs(600),
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Runs one process over rows `start..start + rows.len()` of the batch.
    fn run_slice(&self, start: usize, rows: &[&[f64]]) -> Result<Vec<f64>> {
        let end = start + rows.len();
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Protocol(format!("cannot start `{}`: {e}", self.program)))?;

        let mut stdin = child.stdin.take().expect("piped stdin");
        let payload: String = rows
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
                cells.join(",") + "\n"
            })
            .collect();
        let writer = thread::spawn(move || {
            // a process that exits early closes the pipe; that surfaces as short output
            let _ = stdin.write_all(payload.as_bytes());
        });

        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel::<std::io::Result<String>>();
        let reader = thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });

        let mut stderr = child.stderr.take().expect("piped stderr");
        let drain = thread::spawn(move || {
            let mut text = String::new();
            let _ = std::io::Read::read_to_string(&mut stderr, &mut text);
            text
        });

        let deadline = Instant::now() + self.timeout;
        let mut outputs = Vec::with_capacity(rows.len());
        let mut failure = None;
        while outputs.len() < rows.len() {
            let remaining = deadline.saturating_duration_since(Instant::now());
            match rx.recv_timeout(remaining) {
                Ok(Ok(line)) => {
                    let index = start + outputs.len();
                    match line.trim().parse::<f64>() {
                        Ok(v) if v.is_finite() => outputs.push(v),
                        Ok(v) => {
                            failure = Some(Error::Model {
                                index,
                                message: format!("external model returned {v}"),
                            });
                            break;
                        }
                        Err(_) => {
                            failure = Some(Error::Protocol(format!(
                                "malformed output line for point {index}: {:?}",
                                line
                            )));
                            break;
                        }
                    }
                }
                Ok(Err(e)) => {
                    failure = Some(Error::Protocol(format!("reading model output: {e}")));
                    break;
                }
                Err(mpsc::RecvTimeoutError::Timeout) => {
                    let _ = child.kill();
                    failure = Some(Error::Protocol(format!(
                        "timed out after {:.1} s; outputs missing for points {}..{}",
                        self.timeout.as_secs_f64(),
                        start + outputs.len(),
                        end
                    )));
                    break;
                }
                Err(mpsc::RecvTimeoutError::Disconnected) => break,
            }
        }
        if let Some(err) = failure {
            // grandchildren may still hold the pipes, so the io threads are
            // left to finish on their own
            let _ = child.kill();
            let _ = child.wait();
            return Err(err);
        }
        let status = child.wait()?;
        let _ = writer.join();
        let _ = reader.join();
        let stderr_text = drain.join().unwrap_or_default();
        if outputs.len() < rows.len() {
            return Err(Error::Protocol(format!(
                "process ended ({status}) with outputs missing for points {}..{}{}",
                start + outputs.len(),
                end,
                stderr_suffix(&stderr_text)
            )));
        }
        if !status.success() {
            return Err(Error::Protocol(format!(
                "process exited with {status}{}",
                stderr_suffix(&stderr_text)
            )));
        }
        Ok(outputs)
    }
}

fn stderr_suffix(text: &str) -> String {
    let t = text.trim();
    if t.is_empty() {
        String::new()
    } else {
        format!(": {}", t.lines().last().unwrap_or(""))
    }
}

impl ResponseModel for ExternalModel {
    fn dim(&self) -> usize {
        self.dim
    }

    fn evaluate(&self, x: &[f64]) -> std::result::Result<f64, String> {
        self.run_slice(0, &[x])
            .map(|v| v[0])
            .map_err(|e| e.to_string())
    }

    fn evaluate_batch(&self, xs: &Points) -> Result<Vec<f64>> {
        if xs.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: xs.dim(),
            });
        }
        let rows: Vec<&[f64]> = xs.rows().collect();
        if rows.is_empty() {
            return Ok(Vec::new());
        }
        let workers = self.workers.min(rows.len()).max(1);
        let chunk = rows.len().div_ceil(workers);
        let results: Vec<Result<Vec<f64>>> = thread::scope(|s| {
            let handles: Vec<_> = rows
                .chunks(chunk)
                .enumerate()
                .map(|(w, slice)| s.spawn(move || self.run_slice(w * chunk, slice)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker thread panicked"))
                .collect()
        });
        let mut out = Vec::with_capacity(rows.len());
        for r in results {
            out.extend(r?);
        }
        Ok(out)
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;

    fn shell(script: &str, dim: usize) -> ExternalModel {
        ExternalModel::new("sh", vec!["-c".into(), script.into()], dim)
    }

    fn batch(n: usize) -> Points {
        Points::from_rows(2, (0..2 * n).map(|i| i as f64 * 0.5).collect()).unwrap()
    }

    #[test]
    fn echoes_first_coordinate_in_order() {
        let m = shell("cut -d, -f1", 2).with_workers(3);
        let y = m.evaluate_batch(&batch(10)).unwrap();
        let expect: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(y, expect);
    }

    #[test]
    fn short_output_names_missing_range() {
        let m = shell("head -n 3 | cut -d, -f1", 2);
        match m.evaluate_batch(&batch(8)) {
            Err(Error::Protocol(msg)) => assert!(msg.contains("points 3..8"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_zero_exit_is_a_protocol_error() {
        let m = shell("cut -d, -f1; exit 3", 2);
        let err = m.evaluate_batch(&batch(2)).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn malformed_line_is_reported() {
        let m = shell("while read l; do echo nope; done", 2);
        let err = m.evaluate_batch(&batch(2)).unwrap_err().to_string();
        assert!(err.contains("malformed output line for point 0"));
    }

    #[test]
    fn timeout_kills_the_process() {
        let m = shell("sleep 5", 2).with_timeout(Duration::from_millis(200));
        let t = Instant::now();
        let err = m.evaluate_batch(&batch(2)).unwrap_err().to_string();
        assert!(err.contains("timed out") && err.contains("points 0..2"));
        assert!(t.elapsed() < Duration::from_secs(4));
    }

    #[test]
    fn missing_program_is_reported() {
        let m = ExternalModel::new("/nonexistent/model", vec![], 2);
        assert!(m.evaluate_batch(&batch(1)).is_err());
    }
}
