#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_omori-hawkes"))
}

/// Runs the binary in `dir` with `OMORI_HAWKES_OUT_DIR` cleared.
pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .env_remove("OMORI_HAWKES_OUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// A daily close series on weekdays from GARCH(1,1) log-returns, with the
/// volatility clustering that makes large losses bunch up. Every 997th close
/// is left blank to exercise the cleaning path.
pub fn garch_prices(rows: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (omega, alpha, beta) = (2e-6, 0.09, 0.9);
    let mut var = omega / (1.0 - alpha - beta);
    let mut r_prev: f64 = 0.0;
    let mut price = 100.0;
    let mut date = NaiveDate::from_ymd_opt(1990, 1, 2).unwrap();
    let mut out = String::from("date,close\n");
    for i in 0..rows {
        if i > 0 {
            var = omega + alpha * r_prev * r_prev + beta * var;
            r_prev = var.sqrt() * normal(&mut rng);
            price *= r_prev.exp();
        }
        if i % 997 == 500 {
            out.push_str(&format!("{date},\n"));
        } else {
            out.push_str(&format!("{date},{price:.6}\n"));
        }
        date = date.succ_opt().unwrap();
        while matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
            date = date.succ_opt().unwrap();
        }
    }
    out
}

/// `count` exponential interevent times with the given rate, as a
/// `tau_days` file body.
pub fn exponential_interevents(count: usize, rate: f64, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("tau_days\n");
    for _ in 0..count {
        let u: f64 = 1.0 - rng.random::<f64>();
        out.push_str(&format!("{}\n", -u.ln() / rate));
    }
    out
}

pub fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}
