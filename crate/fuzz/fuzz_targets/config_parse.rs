#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        // Parse errors are expected; panics, hangs and round-trip drift
        // are not.
        if let Ok(cfg) = nanochannel::config::RunConfig::parse(text) {
            let canon = cfg.canonical_string();
            let back = nanochannel::config::RunConfig::parse(&canon)
                .expect("canonical form must re-parse");
            assert_eq!(cfg.hash(), back.hash(), "canonical round-trip must be stable");
            let _ = cfg.scene(None);
        }
    }
});
