#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if nanochannel::sweep::parse_csv(text).is_ok() {
            // Anything that parses must also render.
            let _ = nanochannel::plot::render_svg(text, "x", "eta");
        }
    }
});
