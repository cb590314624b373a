use std::fmt::Write;

use serde_json::Value;

fn list(v: &Value) -> String {
    match v.as_array() {
        Some(a) => a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
        None => v.to_string(),
    }
}

fn settings(out: &mut String, s: &Value) {
    let _ = writeln!(
        out,
        "tolerance {} | truncation {} | oracle truncations ({}) | toeplitz sizes ({}) | samples {} | seed {}",
        s["tolerance"],
        s["truncation"],
        list(&s["oracle_truncations"]),
        list(&s["toeplitz_sizes"]),
        s["samples"],
        s["seed"]
    );
}

fn index_table(out: &mut String, report: &Value) {
    let _ = writeln!(out, "profile {}  (N = {})", profile_string(&report["profile"]), report["dimension"]);
    let _ = writeln!(out, "{:<6} {:<3} {:<3} {:<28} onto", "block", "N", "m", "partial indices");
    let mut l = 1;
    for (b, block) in report["blocks"].as_array().into_iter().flatten().enumerate() {
        let kappas: Vec<String> = block["partial_indices"]
            .as_array()
            .into_iter()
            .flatten()
            .map(|k| {
                let s = format!("κ{l} = {k}");
                l += 1;
                s
            })
            .collect();
        let _ = writeln!(
            out,
            "{:<6} {:<3} {:<3} {:<28} {}",
            b + 1,
            block["size"].to_string(),
            block["order"].to_string(),
            kappas.join(", "),
            if block["onto"] == Value::Bool(true) { "yes" } else { "no" }
        );
    }
    let d = &report["diagnostics"];
    let _ = writeln!(out, "Maslov index κ = {}  (2·wind det G = {})", report["maslov"], d["maslov_from_det"]);
    let _ = writeln!(out, "onto: {}", report["onto"]);
    let _ = writeln!(out, "kernel dimension: {}", report["kernel_dim"]);
    let _ = writeln!(out, "jet order: {}", report["jet_order"]);
    let _ = writeln!(
        out,
        "checks: sum = Maslov {}, second differences ≥ 0 {}, sum to N {}",
        d["sum_matches_maslov"], d["second_differences_nonnegative"], d["second_differences_sum_to_n"]
    );
    let violations = d["violations"].as_array().map_or(0, Vec::len);
    let _ = writeln!(out, "maps into constrained target: {} ({violations} violating entries)", d["well_defined"]);
}

fn profile_string(p: &Value) -> String {
    p["blocks"]
        .as_array()
        .into_iter()
        .flatten()
        .map(|b| format!("{}:{}", b[0], b[1]))
        .collect::<Vec<_>>()
        .join(",")
}

fn reduction(out: &mut String, r: &Value) {
    if r.is_null() {
        return;
    }
    let _ = writeln!(
        out,
        "reduction: orders ({}), det order {}, blocks {}",
        list(&r["orders"]),
        r["det_order"],
        r["profile"].as_str().unwrap_or("")
    );
}

fn generic(out: &mut String, v: &Value) {
    if let Some(map) = v.as_object() {
        for (k, x) in map {
            if k == "settings" {
                continue;
            }
            let _ = writeln!(out, "{k}: {x}");
        }
    }
}

/// Human-readable form of a command report.
pub fn text(command: &str, v: &Value) -> String {
    let mut out = String::new();
    if let Some(e) = v.get("error").filter(|e| v.get("exit_code").is_some() && e.is_string()) {
        let stage = v["stage"].as_str().map(|s| format!("[{s}] ")).unwrap_or_default();
        let _ = writeln!(out, "error: {stage}{}", e.as_str().unwrap_or(""));
        return out;
    }
    if let Some(input) = v.get("input") {
        let _ = writeln!(out, "input: {}", input.as_str().unwrap_or(""));
    }
    match command {
        "analyze" | "pipeline" => {
            reduction(&mut out, &v["reduction"]);
            index_table(&mut out, &v["report"]);
            if command == "pipeline" {
                let o = &v["oracle"];
                let dims: Vec<String> = o["study"]["dimensions"]
                    .as_array()
                    .into_iter()
                    .flatten()
                    .map(|d| format!("{} at {}", d["dimension"], d["truncation"]))
                    .collect();
                let _ = writeln!(
                    out,
                    "oracle ({}): {} [{}; min gap {:.3e}]",
                    o["operator"].as_str().unwrap_or(""),
                    o["status"].as_str().unwrap_or(""),
                    dims.join(", "),
                    o["study"]["min_gap_ratio"].as_f64().unwrap_or(f64::NAN)
                );
                if !v["full_symbol"].is_null() {
                    let _ = writeln!(out, "full symbol numerical kernel: {}", v["full_symbol"]["study"]["dimension"]);
                }
                let _ = writeln!(out, "verdict: {}", v["verdict"].as_str().unwrap_or(""));
            }
        }
        "reduce" => reduction(&mut out, &v["reduction"]),
        "selftest" => {
            for c in v["checks"].as_array().into_iter().flatten() {
                let status = if c["pass"] == Value::Bool(true) { "PASS" } else { "FAIL" };
                let _ = writeln!(out, "{status} {}: {}", c["name"].as_str().unwrap_or(""), c["detail"].as_str().unwrap_or(""));
            }
        }
        _ => generic(&mut out, v),
    }
    if let Some(s) = v.get("settings") {
        settings(&mut out, s);
    }
    out
}
