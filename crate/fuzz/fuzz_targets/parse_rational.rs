#![no_main]

use hybridsum::field::PrimeField;
use hybridsum::polyparse::parse_rational;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|input: &str| {
    let field = PrimeField::new(13).unwrap();
    if let Ok(r) = parse_rational(input, &field) {
        for x in 0..13 {
            for y in 0..13 {
                let _ = r.eval(&field, x, y);
            }
        }
    }
});
