use std::path::PathBuf;

use cbsim::NoiseParams;

fn profile(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../profiles")
        .join(format!("{name}.profile"))
}

/// Set `CBSIM_BLESS=1` to rewrite the shipped profiles.
#[test]
fn shipped_profiles_match() {
    for (name, params) in [
        ("paper", NoiseParams::paper()),
        ("noiseless", NoiseParams::noiseless()),
    ] {
        let path = profile(name);
        if std::env::var_os("CBSIM_BLESS").is_some() {
            std::fs::write(&path, params.to_profile_string()).unwrap();
        }
        let text =
            std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(
            NoiseParams::from_profile_str(&text).unwrap(),
            params,
            "{name}"
        );
    }
}
