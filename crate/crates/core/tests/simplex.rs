use ordunc_core::simplex::simplex_heatmap;
use ordunc_core::{LogBase, MeasureKind};

fn argmax_cell(measure: MeasureKind) -> Vec<f64> {
    let cells = simplex_heatmap(measure, 3, 0.01, LogBase::BITS).unwrap();
    let best = cells.iter().max_by(|a, b| a.tu.total_cmp(&b.tu)).unwrap();
    best.probs.as_slice().to_vec()
}

#[test]
fn entropy_peaks_near_barycenter() {
    // 1/3 is not on a 0.01 lattice; the best lattice cell is a permutation of (.33,.33,.34)
    let p = argmax_cell(MeasureKind::Entropy);
    assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 0.01), "{p:?}");
    let coarse = simplex_heatmap(MeasureKind::Entropy, 3, 1.0 / 30.0, LogBase::BITS).unwrap();
    let best = coarse.iter().max_by(|a, b| a.tu.total_cmp(&b.tu)).unwrap();
    assert!(best.probs.as_slice().iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-12));
}

#[test]
fn ordinal_measures_peak_at_extreme_bimodal() {
    for m in [MeasureKind::OrdinalEntropy, MeasureKind::OrdinalVariance] {
        assert_eq!(argmax_cell(m), vec![0.5, 0.0, 0.5], "{m}");
    }
}

#[test]
fn mirror_symmetry() {
    for m in MeasureKind::ALL {
        let cells = simplex_heatmap(m, 3, 0.02, LogBase::BITS).unwrap();
        for c in &cells {
            let mirrored = c.probs.reversed();
            let twin = cells.iter().find(|d| d.probs == mirrored).expect("lattice is mirror-closed");
            assert!((c.tu - twin.tu).abs() <= 1e-12, "{m} at {:?}", c.probs);
        }
    }
}
