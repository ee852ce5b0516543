use std::process::Command;

fn main() {
    println!("cargo:rerun-if-changed=../../.git/HEAD");
    println!("cargo:rerun-if-changed=../../.git/refs");
    let out = Command::new("git").args(["describe", "--always", "--dirty", "--tags"]).output();
    if let Ok(out) = out {
        let v = String::from_utf8_lossy(&out.stdout).trim().to_string();
        if out.status.success() && !v.is_empty() {
            println!("cargo:rustc-env=RUINLAB_GIT_DESCRIBE={v}");
        }
    }
}
