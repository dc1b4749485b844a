//! Random search over the Case-II embedding family.
//!
//! Candidates must forecast `⌈n*⌉ = 4` under the closed-form law and tip at
//! step 4 with the zero-noise attention-only block. Among those, the search
//! maximises the modal share of the full block's tip step over seeds
//! 100..300, which are disjoint from the 0..50 seeds used for acceptance.
//!
//! Usage: `cargo run --release -p tipcast-core --example tune_case_two [candidates] [rng seed]`
//! or `... tune_case_two check B_NORM COS_AB A_NORM B_DRIVE RATIO`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tipcast_core::basin::tip_forecast;
use tipcast_core::toy::{build_block, greedy_generate, run_seeds, CaseTwoParams, Preset, SweepStats};

fn evaluate(p: CaseTwoParams, seeds: std::ops::Range<u64>) -> Option<(f64, SweepStats, SweepStats)> {
    let f = p.build().ok()?;
    let fc = tip_forecast(&f.a, &f.b, &f.d).ok()?;
    if fc.n_star_ceil != Some(4) {
        return None;
    }
    let bare = build_block(&Preset::Bare.config(0).zero_noise()).ok()?;
    if greedy_generate(&bare, &f.a, &f.b, &f.d).ok()?.tip_step != Some(4) {
        return None;
    }
    let full = SweepStats::from_runs(
        Preset::Full.config(0),
        run_seeds(&Preset::Full.config(0), &f.a, &f.b, &f.d, seeds.clone()).ok()?,
    );
    let skip = SweepStats::from_runs(
        Preset::Skip.config(0),
        run_seeds(&Preset::Skip.config(0), &f.a, &f.b, &f.d, seeds).ok()?,
    );
    if full.untipped > 0 || skip.median? >= full.median? {
        return None;
    }
    Some((full.mode_share, full, skip))
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.get(1).map(String::as_str) == Some("check") {
        let v: Vec<f64> = args[2..].iter().map(|s| s.parse().expect("number")).collect();
        let p = CaseTwoParams {
            b_norm: v[0],
            cos_ab: v[1],
            a_norm: v[2],
            b_drive: v[3],
            ratio: v[4],
        };
        match evaluate(p, 100..300) {
            Some((share, full, skip)) => println!(
                "{}\nfull share {share:.3} mode {:?} std {:.3} hist {:?}; skip median {:?}",
                serde_json::to_string(&p.build().expect("valid")).expect("json"),
                full.mode,
                full.std.unwrap_or(f64::NAN),
                full.histogram,
                skip.median
            ),
            None => println!("not admissible"),
        }
        return;
    }
    let candidates: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(3000);
    let search_seed: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(7);
    let mut rng = ChaCha8Rng::seed_from_u64(search_seed);

    let mut shortlist: Vec<(f64, CaseTwoParams)> = Vec::new();
    for _ in 0..candidates {
        let b_norm: f64 = rng.random_range(0.15..0.9);
        let cos_ab: f64 = rng.random_range(0.4..0.95);
        let a_norm: f64 = rng.random_range(0.05..0.5);
        let b_drive = rng.random_range(0.002..0.5);
        let target = rng.random_range(3.02..3.98);
        let growth = (b_norm * (a_norm * cos_ab - b_norm)).exp();
        let p = CaseTwoParams {
            b_norm,
            cos_ab,
            a_norm,
            b_drive,
            ratio: target / growth,
        };
        if let Some((share, _, _)) = evaluate(p, 100..160) {
            shortlist.push((share, p));
        }
    }
    shortlist.sort_by(|x, y| y.0.total_cmp(&x.0));
    println!("{} admissible candidates", shortlist.len());
    for (_, p) in shortlist.iter().take(10) {
        if let Some((share, full, skip)) = evaluate(*p, 100..300) {
            println!(
                "{p:?}\n  full: share {share:.3} mode {:?} mean {:.2} std {:.2} hist {:?}\n  skip: median {:?} hist {:?}",
                full.mode,
                full.mean.unwrap_or(f64::NAN),
                full.std.unwrap_or(f64::NAN),
                full.histogram,
                skip.median,
                skip.histogram
            );
        }
    }
}
