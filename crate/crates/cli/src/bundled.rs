//! Bundled system-description files: small systems with known closed-form
//! answers, used by the test corpus and as ready-made CLI inputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Result;
use subpress_core::system::{
    CoverSpec, ForbiddenSpec, MeasureSpec, PotentialSpec, SystemDescription,
};

const LN3: f64 = 1.0986122886681098;

/// Full 2-shift with the zero potential and the standard cover; pressure is
/// log 2 at every box.
pub fn full_two_shift() -> SystemDescription {
    let mut covers = BTreeMap::new();
    covers.insert(
        "standard".to_string(),
        CoverSpec {
            window: vec![vec![0]],
            elements: vec![vec![vec![0]], vec![vec![1]]],
        },
    );
    let mut measures = BTreeMap::new();
    measures.insert(
        "uniform".to_string(),
        MeasureSpec::Bernoulli { p: vec![0.5, 0.5] },
    );
    SystemDescription {
        dimension: 1,
        alphabet: 2,
        forbidden: vec![],
        covers,
        potential: Some(PotentialSpec::Additive {
            window: vec![vec![0]],
            table: vec![0.0, 0.0],
        }),
        measures,
    }
}

/// Full 2-shift with the site potential a = (log 3, 0); the Gibbs measure
/// is Bernoulli(3/4, 1/4), the pressure log 4 at every box.
pub fn full_two_shift_gibbs() -> SystemDescription {
    let mut doc = full_two_shift();
    doc.potential = Some(PotentialSpec::Additive {
        window: vec![vec![0]],
        table: vec![LN3, 0.0],
    });
    doc.measures.insert(
        "gibbs".to_string(),
        MeasureSpec::Bernoulli {
            p: vec![0.75, 0.25],
        },
    );
    doc
}

/// Full 3-shift with the two-element overlapping cover {0,1}, {1,2}; the
/// relative entropy of the cover is log 2.
pub fn full_three_shift_overlap() -> SystemDescription {
    let mut covers = BTreeMap::new();
    covers.insert(
        "overlap".to_string(),
        CoverSpec {
            window: vec![vec![0]],
            elements: vec![vec![vec![0], vec![1]], vec![vec![1], vec![2]]],
        },
    );
    covers.insert(
        "standard".to_string(),
        CoverSpec {
            window: vec![vec![0]],
            elements: vec![vec![vec![0]], vec![vec![1]], vec![vec![2]]],
        },
    );
    let mut measures = BTreeMap::new();
    measures.insert(
        "uniform".to_string(),
        MeasureSpec::Bernoulli {
            p: vec![1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
        },
    );
    SystemDescription {
        dimension: 1,
        alphabet: 3,
        forbidden: vec![],
        covers,
        potential: Some(PotentialSpec::Additive {
            window: vec![vec![0]],
            table: vec![0.0, 0.0, 0.0],
        }),
        measures,
    }
}

/// The golden-mean SFT (word 11 forbidden) with its Parry measure; entropy
/// is log((1+sqrt 5)/2).
pub fn golden_mean() -> SystemDescription {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut covers = BTreeMap::new();
    covers.insert(
        "standard".to_string(),
        CoverSpec {
            window: vec![vec![0]],
            elements: vec![vec![vec![0]], vec![vec![1]]],
        },
    );
    let mut measures = BTreeMap::new();
    measures.insert(
        "parry".to_string(),
        MeasureSpec::Markov {
            transition: vec![vec![1.0 / phi, 1.0 / (phi * phi)], vec![1.0, 0.0]],
            stationary: None,
        },
    );
    SystemDescription {
        dimension: 1,
        alphabet: 2,
        forbidden: vec![ForbiddenSpec {
            window: vec![vec![0], vec![1]],
            pattern: vec![1, 1],
        }],
        covers,
        potential: Some(PotentialSpec::Additive {
            window: vec![vec![0]],
            table: vec![0.0, 0.0],
        }),
        measures,
    }
}

/// Writes every bundled system into `dir`, returning the file paths.
pub fn write_all(dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let bundle: [(&str, SystemDescription); 4] = [
        ("full2.json", full_two_shift()),
        ("full2-gibbs.json", full_two_shift_gibbs()),
        ("full3-overlap.json", full_three_shift_overlap()),
        ("golden-mean.json", golden_mean()),
    ];
    let mut paths = Vec::new();
    for (name, doc) in bundle {
        let path = dir.join(name);
        fs::write(&path, doc.to_json())?;
        paths.push(path);
    }
    Ok(paths)
}
