#![no_main]

use eeclass::embed::{self, Embedded2D, EmbeddingKind};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((points, labels)) = embed::parse_points_csv(data) {
        let embedded = Embedded2D {
            points,
            labels,
            kind: EmbeddingKind::EeMei,
            reference_sizes: (1, 1),
        };
        let text = embed::emit_points_csv(&embedded);
        let (p, l) = embed::parse_points_csv(text.as_bytes()).expect("emitted CSV parses");
        assert_eq!(p, embedded.points);
        assert_eq!(l, embedded.labels);
    }
});
