#![no_main]

use hybridsum::field::PrimeField;
use hybridsum::polyparse::parse_poly;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|input: &str| {
    let field = PrimeField::new(101).unwrap();
    // printing an accepted polynomial and parsing it again is the identity
    if let Ok(q) = parse_poly(input, &field) {
        let again = parse_poly(&q.to_string(), &field).expect("canonical form parses");
        assert_eq!(again, q);
    }
});
