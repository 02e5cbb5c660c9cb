//! Generates the bundled 78 × 44 brand/topic sentiment table.
//!
//! Brands belong to five latent segments. Each segment has signature topics
//! it nearly always covers and absent topics it almost never covers; the
//! remaining topics are covered at a topic-specific base rate scaled by the
//! brand's review volume. Observed sentiments are a segment/topic mean plus
//! a brand offset and noise, clipped to [-1, 1].
//!
//! Usage: cargo run --example synth_dataset -- data/brand_topic_sentiment.csv

use std::fs::File;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const SEED: u64 = 20_240_611;
const N_TOPICS: usize = 44;
const SEGMENT_SIZES: [usize; 5] = [20, 17, 16, 14, 11];
const SIGNATURE_TOPICS: usize = 8;
const ABSENT_TOPICS: usize = 6;

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "data/brand_topic_sentiment.csv".to_string());
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    let base_rate: Vec<f64> = (0..N_TOPICS).map(|_| rng.gen_range(0.05..0.40)).collect();

    struct Segment {
        coverage: Vec<f64>,
        mean: Vec<f64>,
    }
    let segments: Vec<Segment> = SEGMENT_SIZES
        .iter()
        .map(|_| {
            let mut topics: Vec<usize> = (0..N_TOPICS).collect();
            topics.shuffle(&mut rng);
            let mut coverage = base_rate.clone();
            for &t in &topics[..SIGNATURE_TOPICS] {
                coverage[t] = 0.85;
            }
            for &t in &topics[SIGNATURE_TOPICS..SIGNATURE_TOPICS + ABSENT_TOPICS] {
                coverage[t] = 0.03;
            }
            let mean = (0..N_TOPICS).map(|_| rng.gen_range(-0.5..0.8)).collect();
            Segment { coverage, mean }
        })
        .collect();

    let mut brands: Vec<usize> = SEGMENT_SIZES
        .iter()
        .enumerate()
        .flat_map(|(s, &n)| std::iter::repeat(s).take(n))
        .collect();
    brands.shuffle(&mut rng);

    let offset = Normal::new(0.0, 0.1).unwrap();
    let noise = Normal::new(0.0, 0.2).unwrap();
    let mut rows: Vec<Vec<Option<f64>>> = Vec::with_capacity(brands.len());
    for &seg in &brands {
        let volume: f64 = rng.gen_range(0.6..1.4);
        let brand_offset = offset.sample(&mut rng);
        let row = (0..N_TOPICS)
            .map(|t| {
                let p = (segments[seg].coverage[t] * volume).min(0.95);
                rng.gen_bool(p).then(|| {
                    let v = segments[seg].mean[t] + brand_offset + noise.sample(&mut rng);
                    (v.clamp(-1.0, 1.0) * 1e4).round() / 1e4
                })
            })
            .collect();
        rows.push(row);
    }

    let mut wtr = csv::Writer::from_writer(File::create(&out).expect("create output"));
    let mut header = vec!["brand".to_string()];
    header.extend((1..=N_TOPICS).map(|t| format!("topic_{t:02}")));
    wtr.write_record(&header).unwrap();
    for (i, row) in rows.iter().enumerate() {
        let mut rec = vec![format!("brand_{:02}", i + 1)];
        rec.extend(
            row.iter()
                .map(|c| c.map(|v| v.to_string()).unwrap_or_default()),
        );
        wtr.write_record(&rec).unwrap();
    }
    wtr.flush().unwrap();

    let missing = rows.iter().flatten().filter(|c| c.is_none()).count();
    let empty_cols = (0..N_TOPICS)
        .filter(|&t| rows.iter().all(|r| r[t].is_none()))
        .count();
    eprintln!(
        "wrote {out}: {} x {N_TOPICS}, missing fraction {:.4}, empty columns {empty_cols}",
        rows.len(),
        missing as f64 / (rows.len() * N_TOPICS) as f64
    );
}
