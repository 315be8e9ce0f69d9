//! Property tests for transforms, data splits, confusion counting and
//! rationale rendering.

use proptest::prelude::*;

use xrec::explain::{band, render};
use xrec::fusion::{decide, EffectivenessTable, FlowDescriptor, VoteSet};
use xrec::inference::confusion_from_votes;
use xrec::ingest::{self, Dataset, Image, ImageSample, PIXELS, SIDE};
use xrec::transforms::binary::{self, binarize, components, crossings, endpoints, skeletonize, Connectivity};
use xrec::transforms::{apply_transform, PropertyId, TransformParams};
use xrec::MetricId;

/// Sparse random strokes: a few thick random walks on a blank canvas.
fn glyph() -> impl Strategy<Value = Image> {
    prop::collection::vec((2usize..26, 2usize..26, prop::collection::vec(0u8..8, 3..14)), 1..4).prop_map(|walks| {
        let mut img = Image::zeros();
        for (mut r, mut c, steps) in walks {
            for step in steps {
                let (dr, dc) = [(-1, 0), (1, 0), (0, -1), (0, 1), (-1, -1), (1, 1), (-1, 1), (1, -1)][step as usize];
                for (rr, cc) in [(r, c), (r + 1, c), (r, c + 1), (r + 1, c + 1)] {
                    if rr < SIDE && cc < SIDE {
                        img.set(rr, cc, 230);
                    }
                }
                r = (r as i64 + dr).clamp(1, SIDE as i64 - 3) as usize;
                c = (c as i64 + dc).clamp(1, SIDE as i64 - 3) as usize;
            }
        }
        img
    })
}

fn noise() -> impl Strategy<Value = Image> {
    prop::collection::vec(any::<u8>(), PIXELS).prop_map(|v| Image::from_slice(&v).unwrap())
}

fn dataset() -> impl Strategy<Value = Dataset> {
    prop::collection::vec(0usize..4, 8..120).prop_map(|labels| {
        let samples = labels
            .into_iter()
            .enumerate()
            .map(|(i, label)| {
                let mut pixels = Image::zeros();
                pixels.set(i / SIDE % SIDE, i % SIDE, 255);
                ImageSample { pixels, label }
            })
            .collect();
        Dataset::new(samples, (0..4).map(|d| d.to_string()).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn identity_is_exact(img in noise()) {
        prop_assert_eq!(apply_transform(PropertyId::Identity, &img, &TransformParams::default()), img);
    }

    #[test]
    fn transforms_are_pure(img in glyph()) {
        let params = TransformParams::default();
        for p in PropertyId::ALL {
            prop_assert_eq!(apply_transform(p, &img, &params), apply_transform(p, &img, &params), "{:?}", p);
        }
    }

    #[test]
    fn blank_in_blank_out(p in prop::sample::select(PropertyId::ALL.to_vec())) {
        let out = apply_transform(p, &Image::zeros(), &TransformParams::default());
        prop_assert!(out.pixels().iter().all(|&v| v == 0), "{:?}", p);
    }

    #[test]
    fn skeleton_is_thin_subset_with_same_components(img in glyph()) {
        let mask = binarize(&img, 128);
        let skel = skeletonize(&mask);
        prop_assert!(skel.is_subset_of(&mask));
        prop_assert_eq!(
            components(&skel, Connectivity::Eight).len(),
            components(&mask, Connectivity::Eight).len()
        );
        prop_assert_eq!(skeletonize(&skel), skel.clone(), "thinning is idempotent");
    }

    #[test]
    fn endpoints_and_crossings_disjoint(img in glyph()) {
        let skel = skeletonize(&binarize(&img, 128));
        let (ends, cross) = (endpoints(&skel), crossings(&skel));
        prop_assert!(!ends.intersects(&cross));
        prop_assert!(ends.is_subset_of(&skel) && cross.is_subset_of(&skel));
        for (r, c) in ends.points() {
            prop_assert_eq!(skel.degree(r, c), 1);
        }
        for (r, c) in cross.points() {
            prop_assert!(skel.degree(r, c) >= 3);
        }
    }

    #[test]
    fn enclosed_regions_are_background(img in glyph()) {
        let mask = binarize(&img, 128);
        let holes = binary::enclosed_regions(&mask);
        prop_assert!(!holes.intersects(&mask));
    }

    #[test]
    fn bands_are_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(band(lo).unwrap() <= band(hi).unwrap());
    }

    #[test]
    fn confusion_partitions_samples(pairs in prop::collection::vec((0usize..5, 0usize..5), 1..200)) {
        let (votes, labels): (Vec<usize>, Vec<usize>) = pairs.iter().copied().unzip();
        let counts = confusion_from_votes(&votes, &labels, 5);
        prop_assert_eq!(counts.len(), 5);
        for (d, c) in counts.iter().enumerate() {
            prop_assert_eq!(c.total(), pairs.len() as f64);
            prop_assert_eq!(c.tp + c.fn_, labels.iter().filter(|&&l| l == d).count() as f64);
            prop_assert_eq!(c.tp + c.fp, votes.iter().filter(|&&v| v == d).count() as f64);
        }
        let correct = pairs.iter().filter(|(v, l)| v == l).count() as f64;
        prop_assert_eq!(counts.iter().map(|c| c.tp).sum::<f64>(), correct);
    }

    #[test]
    fn split_is_a_stratified_partition(data in dataset(), fraction in 0.1f64..0.9, seed in any::<u64>()) {
        let (train, holdout) = ingest::split(&data, fraction, seed).unwrap();
        prop_assert_eq!(train.len() + holdout.len(), data.len());
        prop_assert_eq!(train.len(), (fraction * data.len() as f64).round() as usize);
        let mut pixels: Vec<_> = train.samples().iter().chain(holdout.samples()).map(|s| s.pixels.clone()).collect();
        pixels.sort_by(|a, b| a.pixels().cmp(b.pixels()));
        pixels.dedup();
        prop_assert_eq!(pixels.len(), data.len(), "no sample lands on both sides");
        for (class, &n) in data.support().iter().enumerate() {
            let ideal = fraction * n as f64;
            prop_assert!((train.support()[class] as f64 - ideal).abs() < 1.0 + 1e-9, "class {}", class);
        }
        prop_assert_eq!(ingest::split(&data, fraction, seed).unwrap(), (train, holdout));
    }

    #[test]
    fn rendering_follows_ranking_and_hides_identity(
        cells in prop::collection::vec(prop::collection::vec(0.0f64..1.0, 4), 4),
        ballots in prop::collection::vec(prop::option::of(0usize..4), 4),
    ) {
        prop_assume!(ballots.iter().any(Option::is_some));
        let eff = EffectivenessTable::from_dense(MetricId::Recall, cells).unwrap();
        let props = [PropertyId::Stroke, PropertyId::Corner, PropertyId::Line, PropertyId::Identity];
        let flows: Vec<FlowDescriptor> =
            props.iter().enumerate().map(|(i, &p)| FlowDescriptor::new(i + 1, p)).collect();
        let votes = VoteSet::from_classes(ballots.iter().enumerate().filter_map(|(j, b)| b.map(|d| (j, d))));
        let report = decide(&votes, &eff, &flows, false).unwrap();
        let names: Vec<String> = ["b", "c", "d", "k"].iter().map(|s| s.to_string()).collect();
        let sentences = render(&report, &names);
        prop_assert_eq!(sentences.len(), report.ranked.len());
        for (s, r) in sentences.iter().zip(&report.ranked) {
            let subject = format!("as a {}", names[r.class]);
            prop_assert!(s.contains(&subject), "{} / {}", s, subject);
            prop_assert!(!s.contains("identity"));
        }
        for w in report.ranked.windows(2) {
            prop_assert!(w[0].confidence >= w[1].confidence);
        }
    }
}
