//! Scripted HTTP/1.1 server with request accounting.
//!
//! Routes by path prefix:
//! `/ok` 200, `/missing` 404, `/moved` 301 to `/ok`, `/found` 302 to an
//! absolute `/ok` URL, `/loop` 302 to itself, `/no-head` 405 for HEAD and 200
//! for GET. Anything else is 404.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

#[derive(Clone, Debug)]
pub struct Hit {
    pub port: u16,
    pub method: String,
    pub path: String,
    pub arrived: Instant,
    pub responded: Instant,
}

/// Shared across servers so the in-flight peak covers every host.
#[derive(Default)]
pub struct Accounting {
    in_flight: AtomicUsize,
    peak: AtomicUsize,
    hits: Mutex<Vec<Hit>>,
}

impl Accounting {
    pub fn peak_in_flight(&self) -> usize {
        self.peak.load(Ordering::SeqCst)
    }

    pub fn hits(&self) -> Vec<Hit> {
        self.hits.lock().unwrap().clone()
    }

    pub fn hits_for(&self, port: u16) -> Vec<Hit> {
        let mut hits: Vec<Hit> = self.hits().into_iter().filter(|h| h.port == port).collect();
        hits.sort_by_key(|h| h.arrived);
        hits
    }
}

pub struct MockServer {
    pub port: u16,
    stop: Arc<AtomicBool>,
    accept: Option<thread::JoinHandle<()>>,
}

impl MockServer {
    /// Each request is held for `latency` before the response is written.
    pub fn start(accounting: Arc<Accounting>, latency: Duration) -> MockServer {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let port = listener.local_addr().unwrap().port();
        let stop = Arc::new(AtomicBool::new(false));
        let stop_flag = stop.clone();
        let accept = thread::spawn(move || {
            for stream in listener.incoming() {
                if stop_flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let accounting = accounting.clone();
                thread::spawn(move || serve(stream, port, &accounting, latency));
            }
        });
        MockServer {
            port,
            stop,
            accept: Some(accept),
        }
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://127.0.0.1:{}{path}", self.port)
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(("127.0.0.1", self.port));
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }
}

/// A port with nothing listening on it.
pub fn refused_port() -> u16 {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    listener.local_addr().unwrap().port()
}

fn serve(stream: TcpStream, port: u16, accounting: &Accounting, latency: Duration) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut request_line = String::new();
    if reader.read_line(&mut request_line).unwrap_or(0) == 0 {
        return;
    }
    loop {
        let mut line = String::new();
        match reader.read_line(&mut line) {
            Ok(0) | Err(_) => break,
            Ok(_) if line == "\r\n" || line == "\n" => break,
            Ok(_) => {}
        }
    }
    let mut parts = request_line.split_whitespace();
    let method = parts.next().unwrap_or("").to_owned();
    let path = parts.next().unwrap_or("/").to_owned();

    let arrived = Instant::now();
    let now = accounting.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    accounting.peak.fetch_max(now, Ordering::SeqCst);
    thread::sleep(latency);

    let (code, reason, location) = route(&method, &path, port);
    let body = if method == "GET" { "mock body\n" } else { "" };
    let mut response = format!(
        "HTTP/1.1 {code} {reason}\r\nContent-Length: {}\r\nConnection: close\r\n",
        "mock body\n".len()
    );
    if let Some(loc) = location {
        response.push_str(&format!("Location: {loc}\r\n"));
    }
    response.push_str("\r\n");
    response.push_str(body);

    accounting.in_flight.fetch_sub(1, Ordering::SeqCst);
    accounting.hits.lock().unwrap().push(Hit {
        port,
        method,
        path,
        arrived,
        responded: Instant::now(),
    });
    let mut stream = stream;
    let _ = stream.write_all(response.as_bytes());
    let _ = stream.flush();
}

fn route(method: &str, path: &str, port: u16) -> (u16, &'static str, Option<String>) {
    if path.starts_with("/ok") {
        (200, "OK", None)
    } else if path.starts_with("/moved") {
        (301, "Moved Permanently", Some("/ok".into()))
    } else if path.starts_with("/found") {
        (302, "Found", Some(format!("http://127.0.0.1:{port}/ok")))
    } else if path.starts_with("/loop") {
        (302, "Found", Some("/loop".into()))
    } else if path.starts_with("/no-head") {
        if method == "HEAD" {
            (405, "Method Not Allowed", None)
        } else {
            (200, "OK", None)
        }
    } else {
        (404, "Not Found", None)
    }
}
