//! Big phi on small systems against values frozen from PyPhi 1.2.0 with
//! default settings. Rows are little-endian state-by-node.

use unfold_synth_core::iit::{phi_all_states, Tpm};

fn phis(rows: &[&[f64]], cm: Option<&[&[u8]]>) -> Vec<f64> {
    let cm = cm.map(|cm| cm.iter().map(|r| r.iter().map(|&x| x == 1).collect()).collect());
    let t = Tpm::new(rows.iter().map(|r| r.to_vec()).collect(), cm).unwrap();
    phi_all_states(&t)
        .unwrap()
        .into_iter()
        .map(|r| r.big_phi)
        .collect()
}

fn assert_phis(got: &[f64], expected: &[f64]) {
    assert_eq!(got.len(), expected.len());
    for (i, (g, e)) in got.iter().zip(expected).enumerate() {
        assert!((g - e).abs() < 1e-6, "state {i}: {g} vs {e}");
    }
}

#[test]
fn a_single_node_has_no_integration() {
    assert_phis(&phis(&[&[1.0], &[0.0]], None), &[0.0, 0.0]);
}

#[test]
fn two_swapping_nodes() {
    let rows: [&[f64]; 4] = [&[0.0, 0.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]];
    let cm: [&[u8]; 2] = [&[0, 1], &[1, 0]];
    assert_phis(&phis(&rows, Some(&cm)), &[1.0; 4]);
}

struct Case {
    rows: &'static [&'static [f64]],
    cm: &'static [&'static [u8]],
    phi: &'static [f64],
}

/// Seeded random systems: deterministic and quarter-step probabilistic
/// tables on three nodes, and deterministic tables on two nodes, each with
/// either the full connectivity matrix or the one implied by the table.
const RANDOM: &[Case] = &[
    Case {
        rows: &[
            &[1.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 1.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 1.0],
            &[0.0, 0.0, 0.0],
        ],
        cm: &[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]],
        phi: &[
            0.444444, 0.527778, 0.256945, 0.527778, 0.409723, 0.375, 0.555556, 0.3125,
        ],
    },
    Case {
        rows: &[
            &[0.0, 0.0, 1.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0],
            &[1.0, 1.0, 1.0],
            &[1.0, 0.0, 1.0],
            &[1.0, 1.0, 1.0],
            &[1.0, 1.0, 1.0],
        ],
        cm: &[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]],
        phi: &[
            0.519524, 0.70375, 0.865416, 0.745174, 0.59983, 0.107099, 0.694791, 0.295057,
        ],
    },
    Case {
        rows: &[
            &[0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[1.0, 0.0, 1.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0],
            &[0.0, 1.0, 0.0],
            &[1.0, 0.0, 1.0],
            &[0.0, 0.0, 0.0],
        ],
        cm: &[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]],
        phi: &[
            0.647207, 0.390278, 0.328125, 0.328125, 0.55792, 0.725059, 0.328125, 0.457838,
        ],
    },
    Case {
        rows: &[
            &[1.0, 0.0, 1.0],
            &[0.0, 1.0, 0.0],
            &[1.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.0, 0.0],
            &[1.0, 0.0, 1.0],
            &[1.0, 0.0, 1.0],
        ],
        cm: &[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]],
        phi: &[
            0.464374, 1.131875, 0.585415, 0.829218, 0.0625, 0.747934, 0.1375, 0.3375,
        ],
    },
    Case {
        rows: &[
            &[1.0, 1.0, 1.0],
            &[0.0, 0.0, 0.0],
            &[1.0, 0.0, 1.0],
            &[1.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0],
            &[0.0, 1.0, 0.0],
            &[1.0, 0.0, 1.0],
            &[0.0, 1.0, 0.0],
        ],
        cm: &[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]],
        phi: &[
            0.19375, 0.934599, 0.777374, 0.973958, 0.81418, 0.906079, 0.828125, 0.517361,
        ],
    },
    Case {
        rows: &[
            &[1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0],
            &[0.0, 1.0, 1.0],
            &[1.0, 1.0, 1.0],
            &[1.0, 1.0, 0.0],
            &[1.0, 1.0, 0.0],
        ],
        cm: &[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]],
        phi: &[
            0.546875, 0.105903, 1.015625, 0.078125, 0.078125, 0.328125, 0.546875, 0.078125,
        ],
    },
    Case {
        rows: &[
            &[1.0, 0.0, 1.0],
            &[1.0, 1.0, 1.0],
            &[0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0],
            &[1.0, 1.0, 1.0],
            &[0.0, 0.0, 1.0],
            &[1.0, 0.0, 0.0],
        ],
        cm: &[&[1, 1, 1], &[1, 1, 1], &[1, 0, 1]],
        phi: &[
            0.272677, 0.189732, 0.40625, 0.19757, 0.215278, 0.078125, 0.3125, 0.19757,
        ],
    },
    Case {
        rows: &[
            &[0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0],
            &[0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0],
            &[1.0, 1.0, 0.0],
            &[0.0, 1.0, 1.0],
            &[1.0, 0.0, 0.0],
            &[0.0, 1.0, 1.0],
        ],
        cm: &[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]],
        phi: &[
            0.40625, 1.058025, 0.59375, 0.517153, 0.840626, 0.9875, 0.427522, 0.35,
        ],
    },
    Case {
        rows: &[
            &[0.75, 0.5, 0.75],
            &[0.75, 0.25, 0.5],
            &[0.75, 0.25, 1.0],
            &[0.75, 0.25, 0.75],
            &[0.0, 0.25, 0.0],
            &[0.25, 0.0, 0.25],
            &[0.5, 0.5, 1.0],
            &[0.0, 0.25, 0.5],
        ],
        cm: &[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]],
        phi: &[
            0.206751, 0.152025, 0.227733, 0.13035, 0.294085, 0.309081, 0.355924, 0.312651,
        ],
    },
    Case {
        rows: &[
            &[0.0, 0.0, 1.0],
            &[0.25, 0.0, 1.0],
            &[0.5, 0.0, 1.0],
            &[0.25, 0.5, 0.25],
            &[0.0, 1.0, 0.0],
            &[0.0, 0.25, 1.0],
            &[0.25, 0.75, 1.0],
            &[1.0, 0.5, 1.0],
        ],
        cm: &[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]],
        phi: &[
            0.428814, 0.450845, 0.379105, 0.446414, 0.481742, 0.409298, 0.558319, 0.385561,
        ],
    },
    Case {
        rows: &[
            &[0.75, 0.75, 0.25],
            &[0.0, 0.25, 0.5],
            &[0.5, 0.75, 0.5],
            &[0.5, 0.0, 1.0],
            &[0.25, 0.0, 0.0],
            &[1.0, 0.5, 1.0],
            &[0.5, 1.0, 1.0],
            &[0.25, 0.25, 0.0],
        ],
        cm: &[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]],
        phi: &[
            0.380858, 0.463405, 0.300815, 0.936411, 0.863107, 0.626783, 0.777446, 0.496618,
        ],
    },
    Case {
        rows: &[
            &[0.5, 0.0, 1.0],
            &[0.0, 1.0, 0.25],
            &[0.5, 0.75, 0.5],
            &[0.25, 1.0, 0.25],
            &[0.5, 0.5, 0.25],
            &[0.75, 1.0, 1.0],
            &[1.0, 1.0, 0.75],
            &[0.5, 1.0, 0.75],
        ],
        cm: &[&[1, 1, 1], &[1, 1, 1], &[1, 1, 1]],
        phi: &[
            0.347683, 0.524708, 0.161563, 0.184764, 0.149904, 0.225328, 0.304641, 0.248415,
        ],
    },
    Case {
        rows: &[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 0.0], &[1.0, 1.0]],
        cm: &[&[1, 1], &[0, 1]],
        phi: &[0.0, 0.0, 0.0, 0.0],
    },
    Case {
        rows: &[&[1.0, 1.0], &[1.0, 0.0], &[0.0, 1.0], &[1.0, 0.0]],
        cm: &[&[1, 1], &[1, 1]],
        phi: &[0.4375, 0.215278, 0.4375, 0.215278],
    },
    Case {
        rows: &[&[1.0, 0.0], &[1.0, 1.0], &[0.0, 0.0], &[1.0, 1.0]],
        cm: &[&[1, 1], &[1, 0]],
        phi: &[0.4375, 0.215278, 0.4375, 0.215278],
    },
];

#[test]
fn random_systems() {
    for (k, case) in RANDOM.iter().enumerate() {
        let got = phis(case.rows, Some(case.cm));
        for (i, (g, e)) in got.iter().zip(case.phi).enumerate() {
            assert!((g - e).abs() < 1e-6, "case {k} state {i}: {g} vs {e}");
        }
    }
}

/// A deterministic, fully connected four-node system whose concept
/// distances are noisy enough to trip a fixed transport tolerance.
const FOUR_NODES: Case = Case {
    rows: &[
        &[0.0, 1.0, 0.0, 1.0],
        &[1.0, 0.0, 1.0, 1.0],
        &[1.0, 1.0, 0.0, 1.0],
        &[1.0, 0.0, 1.0, 1.0],
        &[1.0, 1.0, 0.0, 0.0],
        &[1.0, 1.0, 1.0, 0.0],
        &[1.0, 1.0, 1.0, 0.0],
        &[0.0, 1.0, 1.0, 0.0],
        &[0.0, 1.0, 1.0, 0.0],
        &[1.0, 1.0, 1.0, 1.0],
        &[1.0, 0.0, 1.0, 1.0],
        &[1.0, 1.0, 1.0, 0.0],
        &[0.0, 1.0, 1.0, 1.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[1.0, 0.0, 1.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
    ],
    cm: &[&[1, 1, 1, 1], &[1, 1, 1, 1], &[1, 1, 1, 1], &[1, 1, 1, 1]],
    phi: &[
        2.05818, 1.861218, 2.319429, 2.01532, 2.389769, 1.31305, 1.83054, 1.646764, 2.081863, 2.822292,
        1.945945, 2.598481, 2.726029, 2.194127, 3.205208, 4.192131,
    ],
};

#[test]
fn four_node_system() {
    let got = phis(FOUR_NODES.rows, Some(FOUR_NODES.cm));
    assert_phis(&got, FOUR_NODES.phi);
}
