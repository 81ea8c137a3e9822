//! Writes the demo object raster used by the shipped configs.
//!
//! The object is mirror-symmetric about the horizontal midline (row `r` ↔ row
//! `511 - r`): a line of glyphs that are themselves up-down symmetric, with a
//! disk above and below it.
//!
//!     cargo run -p darkfield-core --example make_object -- configs/object.pgm

use std::io::Write;

const N: usize = 512;
const CELL: usize = 8;

// 5x7 glyphs, each symmetric under row reversal
const GLYPHS: &[(char, [&str; 7])] = &[
    (
        'C',
        [
            "01110", "10001", "10000", "10000", "10000", "10001", "01110",
        ],
    ),
    (
        'H',
        [
            "10001", "10001", "10001", "11111", "10001", "10001", "10001",
        ],
    ),
    (
        'O',
        [
            "01110", "10001", "10001", "10001", "10001", "10001", "01110",
        ],
    ),
    (
        'I',
        [
            "11111", "00100", "00100", "00100", "00100", "00100", "11111",
        ],
    ),
    (
        'E',
        [
            "11111", "10000", "10000", "11110", "10000", "10000", "11111",
        ],
    ),
];

fn glyph(c: char) -> &'static [&'static str; 7] {
    &GLYPHS.iter().find(|(g, _)| *g == c).expect("glyph").1
}

fn main() -> std::io::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "configs/object.pgm".to_string());
    let mut img = vec![0u8; N * N];

    let text = "CHOICE";
    let advance = 6 * CELL;
    let width = text.len() * advance - CELL;
    let left = (N - width) / 2;
    let top = N / 2 - 7 * CELL / 2;
    for (i, c) in text.chars().enumerate() {
        for (gr, row) in glyph(c).iter().enumerate() {
            for (gc, bit) in row.bytes().enumerate() {
                if bit != b'1' {
                    continue;
                }
                for dr in 0..CELL {
                    for dc in 0..CELL {
                        let r = top + gr * CELL + dr;
                        let col = left + i * advance + gc * CELL + dc;
                        img[r * N + col] = 255;
                    }
                }
            }
        }
    }

    let center = (N as f64 - 1.0) / 2.0;
    for (cy, radius) in [(center - 120.0, 30.0), (center + 120.0, 30.0)] {
        for r in 0..N {
            for c in 0..N {
                let (y, x) = (r as f64 - cy, c as f64 - center - 60.0);
                if x * x + y * y <= radius * radius {
                    img[r * N + c] = 255;
                }
            }
        }
    }

    for r in 0..N {
        for c in 0..N {
            assert_eq!(img[r * N + c], img[(N - 1 - r) * N + c], "not symmetric");
        }
    }

    let mut f = std::fs::File::create(&out)?;
    write!(f, "P5\n{N} {N}\n255\n")?;
    f.write_all(&img)?;
    eprintln!("wrote {out}");
    Ok(())
}
