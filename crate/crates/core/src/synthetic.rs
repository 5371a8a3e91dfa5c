//! A rank-2 synthetic example with nontrivial commutation factor: the
//! quantum torus `XY = ζ_4^{-1} YX` acting on `C[(Z/4)^2]`, realised by
//! constant fields.

use std::collections::HashMap;
use std::sync::Arc;

use crate::fields::{BasisInfo, Field, FieldKind, TruncatedModule, Vector};
use crate::grading::Grading;
use crate::scalars::{qi, Cyclo, Q};

fn index(i: i64, j: i64) -> usize {
    (i.rem_euclid(4) * 4 + j.rem_euclid(4)) as usize
}

pub struct QuantumTorus {
    pub module: Arc<TruncatedModule>,
    pub x: Field,
    pub y: Field,
}

/// `X e_{i,j} = ζ^{-j} e_{i+1,j}`, `Y e_{i,j} = e_{i,j+1}`, all in degree 0.
pub fn quantum_torus(grading: Grading) -> QuantumTorus {
    let group = grading.group.clone();
    let basis = (0..16)
        .map(|k| {
            let (i, j) = (k / 4, k % 4);
            BasisInfo {
                sector: group.element(&[i, j]),
                degree: Q::from(0),
                label: format!("e[{i},{j}]"),
            }
        })
        .collect();
    let module = Arc::new(TruncatedModule::new(
        "quantum_torus",
        grading,
        basis,
        |_| Some(qi(64)),
        Some(0),
    ));
    let mut xm = HashMap::new();
    let mut ym = HashMap::new();
    for i in 0..4 {
        for j in 0..4 {
            let mut v = Vector::new();
            v.add_at(index(i + 1, j), &Cyclo::root_of_unity(4, -j));
            xm.insert((qi(-1), index(i, j)), v);
            ym.insert((qi(-1), index(i, j)), Vector::basis(index(i, j + 1)));
        }
    }
    let x = Field::new(
        "X",
        group.element(&[1, 0]),
        qi(0),
        module.clone(),
        FieldKind::Stored(Arc::new(xm)),
    );
    let y = Field::new(
        "Y",
        group.element(&[0, 1]),
        qi(0),
        module.clone(),
        FieldKind::Stored(Arc::new(ym)),
    );
    QuantumTorus { module, x, y }
}
