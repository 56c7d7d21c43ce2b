//! Regenerate the checked-in chain profile files from the builtin
//! defaults: `cargo run -p zapledger --example dump_profiles -- profiles/`.

use zapledger::profile::ChainProfile;

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "profiles".into());
    std::fs::create_dir_all(&dir).expect("create profile dir");
    for profile in [ChainProfile::ethereum(), ChainProfile::quorum()] {
        let path = format!("{dir}/{}.json", profile.name);
        std::fs::write(&path, profile.to_json_string()).expect("write profile");
        println!("wrote {path}");
    }
}
