//! Drives the command-line front end in-process: check a kernel, run a short
//! selftest and print the JSON report.

fn main() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let code = cstar_kernels::cli::run(["cstar-kernels", "check", &format!("{dir}/additive_cnd.json"), "--mode", "cnd"]);
    eprintln!("check exited with {code}");
    let code = cstar_kernels::cli::run(["cstar-kernels", "selftest", "--cases", "10", "--points", "3"]);
    eprintln!("selftest exited with {code}");
}
