use maxsurf::families::{build_catalog, verify_entry};

fn main() {
    for e in build_catalog().expect("catalog") {
        let t = std::time::Instant::now();
        let r = verify_entry(&e);
        println!("== {} ({:.2?}) {}", r.name, t.elapsed(), if r.passed() { "PASS" } else { "FAIL" });
        for c in &r.checks {
            if !c.passed || std::env::var("VERBOSE").is_ok() {
                println!("  [{}] {}: {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
            }
        }
    }
}
