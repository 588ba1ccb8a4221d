//! Out-of-process backends: a local command speaking JSON over stdio, or an
//! HTTP endpoint accepting a JSON POST.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde_json::Value;

use super::{wire_request, ProviderSpec, Request};
use crate::error::{Error, Result};

/// Exit status a command uses to ask for a retry.
pub const EXIT_TEMPFAIL: i32 = 75;

fn timeout(spec: &ProviderSpec) -> Duration {
    Duration::from_secs_f64(if spec.timeout_s > 0.0 { spec.timeout_s } else { 120.0 })
}

/// Runs `endpoint` (whitespace-separated program and arguments), writes the
/// wire request to its stdin and parses its stdout as the response.
pub fn call_command(spec: &ProviderSpec, req: &Request) -> Result<Value> {
    let kind = req.kind;
    let mut parts = spec.endpoint.split_whitespace();
    let program = parts
        .next()
        .ok_or_else(|| Error::Config(format!("providers.{kind}: command endpoint is empty")))?;
    let mut child = Command::new(program)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::provider(kind, format!("cannot start {program}: {e}")))?;
    let payload = serde_json::to_vec(&wire_request(spec, req)).map_err(|e| Error::json("wire request", e))?;
    let mut stdin = child.stdin.take().expect("stdin is piped");
    let writer = std::thread::spawn(move || stdin.write_all(&payload));
    let mut stdout = child.stdout.take().expect("stdout is piped");
    let reader = std::thread::spawn(move || {
        let mut buf = Vec::new();
        stdout.read_to_end(&mut buf).map(|_| buf)
    });
    let mut stderr = child.stderr.take().expect("stderr is piped");
    let err_reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr.read_to_string(&mut buf);
        buf
    });

    let deadline = Instant::now() + timeout(spec);
    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(Error::Transient {
                    kind: kind.to_string(),
                    message: format!("timed out after {:?}", timeout(spec)),
                });
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(5)),
            Err(e) => return Err(Error::provider(kind, format!("wait failed: {e}"))),
        }
    };
    // A command may exit without reading its input; that is not our error.
    let _ = writer.join();
    let out = reader
        .join()
        .map_err(|_| Error::provider(kind, "stdout reader panicked"))?
        .map_err(|e| Error::provider(kind, format!("reading stdout: {e}")))?;
    let err_text = err_reader.join().unwrap_or_default();
    if !status.success() {
        let message = format!("exit status {status}: {}", err_text.trim());
        return Err(if status.code() == Some(EXIT_TEMPFAIL) {
            Error::Transient {
                kind: kind.to_string(),
                message,
            }
        } else {
            Error::provider(kind, message)
        });
    }
    serde_json::from_slice(&out).map_err(|e| Error::provider(kind, format!("stdout is not JSON: {e}")))
}

/// POSTs the wire request to `endpoint`. Rate limiting, server errors and
/// transport failures are transient; other statuses are not.
pub fn call_http(spec: &ProviderSpec, req: &Request) -> Result<Value> {
    let kind = req.kind;
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(timeout(spec)))
        .build()
        .into();
    let mut request = agent.post(&spec.endpoint);
    if let Some(var) = &spec.api_key_env {
        let key = std::env::var(var)
            .map_err(|_| Error::Config(format!("providers.{kind}: environment variable {var} is not set")))?;
        request = request.header("Authorization", &format!("Bearer {key}"));
    }
    match request.send_json(wire_request(spec, req)) {
        Ok(mut resp) => resp
            .body_mut()
            .read_json::<Value>()
            .map_err(|e| Error::provider(kind, format!("response is not JSON: {e}"))),
        Err(ureq::Error::StatusCode(code)) if code == 429 || code >= 500 => Err(Error::Transient {
            kind: kind.to_string(),
            message: format!("HTTP {code}"),
        }),
        Err(ureq::Error::StatusCode(code)) => Err(Error::provider(kind, format!("HTTP {code}"))),
        Err(e) => Err(Error::Transient {
            kind: kind.to_string(),
            message: e.to_string(),
        }),
    }
}

#[cfg(all(test, unix))]
mod tests {
    use super::*;
    use crate::provider::{Backend, ProviderKind};
    use serde_json::json;

    fn command_spec(cmd: &str) -> ProviderSpec {
        ProviderSpec {
            backend: Backend::Command,
            endpoint: cmd.into(),
            timeout_s: 5.0,
            ..Default::default()
        }
    }

    #[test]
    fn command_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let script = dir.path().join("p.sh");
        std::fs::write(&script, "#!/bin/sh\ncat >/dev/null\necho '{\"score\": 0.5}'\n").unwrap();
        let spec = command_spec(&format!("sh {}", script.display()));
        let req = Request::new(ProviderKind::AestheticScorer, json!({}));
        assert_eq!(call_command(&spec, &req).unwrap(), json!({"score": 0.5}));
    }

    #[test]
    fn exit_codes_map_to_error_kinds() {
        let dir = tempfile::tempdir().unwrap();
        let req = Request::new(ProviderKind::AestheticScorer, json!({}));
        for (code, transient) in [(75, true), (1, false)] {
            let script = dir.path().join(format!("exit{code}.sh"));
            std::fs::write(&script, format!("#!/bin/sh\nexit {code}\n")).unwrap();
            let spec = command_spec(&format!("sh {}", script.display()));
            let err = call_command(&spec, &req).unwrap_err();
            assert_eq!(matches!(err, Error::Transient { .. }), transient, "{err}");
        }
    }

    #[test]
    fn missing_program_is_an_error() {
        let spec = command_spec("/nonexistent/provider-binary");
        let req = Request::new(ProviderKind::AestheticScorer, json!({}));
        assert!(call_command(&spec, &req).is_err());
    }
}
