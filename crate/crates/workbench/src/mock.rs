//! A deterministic stand-in for an embedding service.
//!
//! Each text maps to a unit vector derived from a hash of its bytes, except
//! texts of the form `axis:<i>`, which map to the `i`-th basis vector. The
//! server speaks just enough HTTP/1.1 for [`crate::EmbedClient`] and closes
//! every connection after one response.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn mix(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// The mock's embedding of `text` in `dim` dimensions (unit norm).
pub fn mock_embedding(text: &str, dim: usize) -> Vec<f64> {
    if let Some(i) = text
        .strip_prefix("axis:")
        .and_then(|s| s.trim().parse::<usize>().ok())
    {
        let mut v = vec![0.0; dim];
        v[i % dim] = 1.0;
        return v;
    }
    let h = fnv1a(text.as_bytes());
    let raw: Vec<f64> = (0..dim as u64)
        .map(|j| (mix(h ^ mix(j + 1)) >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0)
        .collect();
    mupo_core::normalize(&raw).unwrap_or_else(|_| {
        let mut v = vec![0.0; dim];
        v[0] = 1.0;
        v
    })
}

/// Fault injection for client tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MockBehavior {
    pub dim: usize,
    /// Answer 503 to this many requests before serving normally.
    pub fail_first: usize,
    /// Return one vector fewer than requested.
    pub drop_last: bool,
    /// Put a `null` in the first vector.
    pub non_finite: bool,
}

impl Default for MockBehavior {
    fn default() -> Self {
        Self {
            dim: 8,
            fail_first: 0,
            drop_last: false,
            non_finite: false,
        }
    }
}

struct Shared {
    behavior: MockBehavior,
    requests: AtomicUsize,
    stop: AtomicBool,
}

/// A mock server running on a background thread; stopped on drop.
pub struct MockEmbedServer {
    addr: SocketAddr,
    shared: Arc<Shared>,
    handle: Option<JoinHandle<()>>,
}

impl MockEmbedServer {
    /// Binds an ephemeral localhost port.
    pub fn start(behavior: MockBehavior) -> std::io::Result<Self> {
        Self::bind("127.0.0.1:0", behavior)
    }

    pub fn bind(addr: &str, behavior: MockBehavior) -> std::io::Result<Self> {
        let listener = TcpListener::bind(addr)?;
        let addr = listener.local_addr()?;
        let shared = Arc::new(Shared {
            behavior,
            requests: AtomicUsize::new(0),
            stop: AtomicBool::new(false),
        });
        let worker = Arc::clone(&shared);
        let handle = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if worker.stop.load(Ordering::SeqCst) {
                    break;
                }
                if let Ok(stream) = stream {
                    // a broken client connection only affects that client
                    let _ = handle_connection(stream, &worker);
                }
            }
        });
        Ok(Self {
            addr,
            shared,
            handle: Some(handle),
        })
    }

    pub fn url(&self) -> String {
        format!("http://{}/embed", self.addr)
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Requests received so far, including failed ones.
    pub fn requests(&self) -> usize {
        self.shared.requests.load(Ordering::SeqCst)
    }

    /// Blocks until the server thread exits (it never does on its own).
    pub fn wait(mut self) {
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

impl Drop for MockEmbedServer {
    fn drop(&mut self) {
        if let Some(h) = self.handle.take() {
            self.shared.stop.store(true, Ordering::SeqCst);
            // wake the accept loop so it sees the flag
            let _ = TcpStream::connect(self.addr);
            let _ = h.join();
        }
    }
}

fn respond(stream: &mut TcpStream, status: &str, body: &str) -> std::io::Result<()> {
    write!(
        stream,
        "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )?;
    stream.flush()
}

fn handle_connection(mut stream: TcpStream, shared: &Shared) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let mut length = 0usize;
    loop {
        let mut header = String::new();
        if reader.read_line(&mut header)? == 0 || header == "\r\n" || header == "\n" {
            break;
        }
        if let Some((name, value)) = header.split_once(':') {
            if name.trim().eq_ignore_ascii_case("content-length") {
                length = value.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0u8; length];
    reader.read_exact(&mut body)?;

    let seen = shared.requests.fetch_add(1, Ordering::SeqCst);
    if !request_line.starts_with("POST ") {
        return respond(
            &mut stream,
            "405 Method Not Allowed",
            r#"{"error":"POST only"}"#,
        );
    }
    let b = shared.behavior;
    if seen < b.fail_first {
        return respond(
            &mut stream,
            "503 Service Unavailable",
            r#"{"error":"warming up"}"#,
        );
    }
    let texts: Vec<String> = match serde_json::from_slice::<serde_json::Value>(&body)
        .ok()
        .and_then(|v| serde_json::from_value(v.get("texts")?.clone()).ok())
    {
        Some(t) => t,
        None => {
            return respond(
                &mut stream,
                "400 Bad Request",
                r#"{"error":"expected {\"texts\": [...]}"}"#,
            )
        }
    };
    let mut vectors: Vec<serde_json::Value> = texts
        .iter()
        .map(|t| serde_json::json!(mock_embedding(t, b.dim)))
        .collect();
    if b.drop_last {
        vectors.pop();
    }
    if b.non_finite {
        if let Some(first) = vectors.first_mut() {
            first[0] = serde_json::Value::Null;
        }
    }
    let out = serde_json::json!({ "embeddings": vectors }).to_string();
    respond(&mut stream, "200 OK", &out)
}
