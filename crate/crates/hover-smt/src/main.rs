use hover_smt::sexpr;
use hover_smt::Engine;
use std::io::{self, BufRead, Write};

fn main() {
    let stdin = io::stdin();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let mut engine = Engine::new();
    let mut buf = String::new();
    for line in stdin.lock().lines() {
        let line = match line {
            Ok(l) => l,
            Err(_) => break,
        };
        buf.push_str(&line);
        buf.push('\n');
        if !sexpr::balanced(&buf) {
            continue;
        }
        let chunk = std::mem::take(&mut buf);
        if chunk.contains("(exit)") {
            let resp = engine.run(&chunk);
            let _ = out.write_all(resp.as_bytes());
            let _ = out.flush();
            return;
        }
        let resp = engine.run(&chunk);
        if !resp.is_empty() {
            if out.write_all(resp.as_bytes()).is_err() {
                return;
            }
        }
        if out.flush().is_err() {
            return;
        }
    }
}
