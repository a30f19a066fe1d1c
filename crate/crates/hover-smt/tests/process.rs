//! Drives the solver binary over stdin/stdout, the way a client process would.

use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};

fn spawn() -> std::process::Child {
    Command::new(env!("CARGO_BIN_EXE_hover-smt"))
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .expect("spawn hover-smt")
}

#[test]
fn check_sat_over_pipes() {
    let mut child = spawn();
    let mut stdin = child.stdin.take().unwrap();
    let stdout = child.stdout.take().unwrap();
    let mut lines = BufReader::new(stdout).lines();

    writeln!(stdin, "(set-logic QF_LIRA)").unwrap();
    writeln!(stdin, "(declare-const x Int)").unwrap();
    writeln!(stdin, "(assert (and (>= x 5) (<= x 5)))").unwrap();
    writeln!(stdin, "(check-sat)").unwrap();
    stdin.flush().unwrap();
    assert_eq!(lines.next().unwrap().unwrap(), "sat");

    writeln!(stdin, "(get-model)").unwrap();
    stdin.flush().unwrap();
    let mut model = String::new();
    loop {
        let line = lines.next().unwrap().unwrap();
        model.push_str(&line);
        if line.trim_end().ends_with(')') && model.matches('(').count() == model.matches(')').count()
        {
            break;
        }
    }
    assert!(model.contains("(define-fun x () Int 5)"), "{}", model);

    writeln!(stdin, "(push 1)").unwrap();
    writeln!(stdin, "(assert (< x 0))").unwrap();
    writeln!(stdin, "(check-sat)").unwrap();
    stdin.flush().unwrap();
    assert_eq!(lines.next().unwrap().unwrap(), "unsat");

    writeln!(stdin, "(exit)").unwrap();
    stdin.flush().unwrap();
    drop(stdin);
    let status = child.wait().unwrap();
    assert!(status.success());
}

#[test]
fn multiline_command() {
    let mut child = spawn();
    let mut stdin = child.stdin.take().unwrap();
    let stdout = child.stdout.take().unwrap();
    let mut lines = BufReader::new(stdout).lines();

    writeln!(stdin, "(declare-const y Real)").unwrap();
    writeln!(stdin, "(assert (or (= y 1.0)").unwrap();
    writeln!(stdin, "            (= y 2.0)))").unwrap();
    writeln!(stdin, "(check-sat)").unwrap();
    stdin.flush().unwrap();
    assert_eq!(lines.next().unwrap().unwrap(), "sat");
    drop(stdin);
    let _ = child.wait();
}
