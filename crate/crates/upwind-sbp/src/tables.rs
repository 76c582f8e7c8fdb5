//! Published coefficient tables: boundary spacings h_1..h_K and norm weights
//! mu_1..mu_2p for the schemes of order 4..12, plus validation against the
//! construction pipeline.
//!
//! Values are stored as decimal strings and parsed at load; nothing here is
//! ever re-rounded. Each mu list carries one trailing interior entry (always
//! 1), kept verbatim; loading resolves the count against the 2p unknowns of
//! the norm solve and records that in the validation report.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::family::{ds_solution, DsSolution};
use crate::grid::ShiftParams;
use crate::stencil::InteriorStencil;

#[derive(Clone, Copy, Debug)]
pub struct GoldenScheme {
    /// 2p
    pub order: usize,
    /// K, the number of shifted spacings per side
    pub shifts: usize,
    pub h_params: &'static [&'static str],
    /// 2p boundary weights plus the trailing interior 1; empty when the
    /// source publishes the grid but not the weights.
    pub mu: &'static [&'static str],
}

pub const GOLDEN: &[GoldenScheme] = &[
    GoldenScheme {
        order: 4,
        shifts: 1,
        h_params: &["0.64701892044823239"],
        mu: &[
            "0.186109276322411116",
            "0.975448598874482986",
            "0.976489275826791681",
            "1.008971769424537701",
            "1",
        ],
    },
    GoldenScheme {
        order: 6,
        shifts: 1,
        h_params: &["0.55959440808516225"],
        mu: &[
            "0.162227980272819955",
            "0.873555067807182617",
            "1.031381558634351325",
            "0.991130867107816504",
            "1.001296776753106244",
            "1.000002157509889189",
            "1",
        ],
    },
    GoldenScheme {
        order: 6,
        shifts: 2,
        h_params: &["0.52989554067209088", "0.9577049256058392"],
        mu: &[
            "0.153545834255111785",
            "0.827868630728788024",
            "1.007836990306931968",
            "0.998846303560314341",
            "0.999229946106053313",
            "1.000272761320736059",
            "1",
        ],
    },
    GoldenScheme {
        order: 8,
        shifts: 1,
        h_params: &["0.53057599940567612"],
        mu: &[
            "0.294839655769715270",
            "1.526077766754849963",
            "0.256381448412698443",
            "1.799899415784832479",
            "0.410922343474426854",
            "1.279556051587301679",
            "0.922938436948853691",
            "1.009384881267321621",
            "1",
        ],
    },
    GoldenScheme {
        order: 8,
        shifts: 2,
        h_params: &["0.39203322551059488", "0.81423930361885499"],
        mu: &[
            "0.110338815724131761",
            "0.635841857271623012",
            "0.950804714528380446",
            "1.013133760425796615",
            "0.994604889106195045",
            "1.001983074003966800",
            "0.999507111548435856",
            "1.000058306520917872",
            "1",
        ],
    },
    GoldenScheme {
        order: 8,
        shifts: 3,
        h_params: &["0.43979786646687147", "0.90985090947051206", "1.0771428495647428"],
        mu: &[
            "0.123920978343533647",
            "0.712830551002903490",
            "1.054602637461168113",
            "1.046653662344426694",
            "0.985006468579236016",
            "1.004695892473460361",
            "0.998971519552118048",
            "1.000109915745287070",
            "1",
        ],
    },
    GoldenScheme {
        order: 10,
        shifts: 1,
        h_params: &["0.50900297608285072"],
        mu: &[
            "0.144437776901122500",
            "0.817330306276763396",
            "1.085198183908459013",
            "0.929611527349792244",
            "1.055478528306474040",
            "0.964711409696087818",
            "1.016688169724728752",
            "0.994562982288813791",
            "1.001083360908970654",
            "0.999900730721632103",
            "1",
        ],
    },
    GoldenScheme {
        order: 10,
        shifts: 2,
        h_params: &["0.37366515483267776", "0.79308655639992476"],
        mu: &[
            "0.104654633738292063",
            "0.609748535967006844",
            "0.940178174636667863",
            "1.018013035012260925",
            "0.991135498769543100",
            "1.004360329350681758",
            "0.998221653537359699",
            "1.000531902166808873",
            "0.999898886800964282",
            "1.000009061253016585",
            "1",
        ],
    },
    GoldenScheme {
        order: 12,
        shifts: 1,
        h_params: &["0.48125000596046169"],
        mu: &[],
    },
    GoldenScheme {
        order: 12,
        shifts: 2,
        h_params: &["0.38823311074361344", "0.81640993512856175"],
        mu: &[
            "0.108740366453879106",
            "0.632865778556215175",
            "0.956449007732071865",
            "1.007176273126186183",
            "1.001241188722324038",
            "0.995791403173844181",
            "1.004146733839414329",
            "0.997356904816331769",
            "1.001160562212721983",
            "0.999659249972080222",
            "1.000060503196924522",
            "0.999995074070187173",
            "1",
        ],
    },
];

pub fn golden(order: usize, shifts: usize) -> Option<&'static GoldenScheme> {
    GOLDEN.iter().find(|g| g.order == order && g.shifts == shifts)
}

/// All (order, shifts) pairs with a workable construction: the published
/// shifted grids plus the uniform closures that admit positive weights.
pub fn all_scheme_ids() -> Vec<(usize, usize)> {
    let mut ids = vec![(4, 0), (6, 0), (8, 0)];
    ids.extend(GOLDEN.iter().map(|g| (g.order, g.shifts)));
    ids.sort_unstable();
    ids
}

pub fn shift_params(order: usize, shifts: usize) -> Result<ShiftParams> {
    if shifts == 0 {
        return Ok(ShiftParams::none());
    }
    let g = golden(order, shifts).ok_or(Error::UnknownScheme { order, shifts })?;
    ShiftParams::from_strings(g.h_params)
}

/// Comparison of one published weight against its re-derived value.
#[derive(Clone, Copy, Debug)]
pub struct WeightDigits {
    pub index: usize,
    pub published: f64,
    pub derived: f64,
    /// Matching significant digits, -log10 of the relative difference
    /// (capped at 17 when the values agree to f64 resolution).
    pub sig_digits: f64,
}

#[derive(Clone, Debug)]
pub struct SchemeValidation {
    pub order: usize,
    pub shifts: usize,
    pub published_len: usize,
    /// Entries past the 2p norm unknowns; must all equal 1 (interior weight).
    pub trailing_interior_ok: bool,
    pub weights: Vec<WeightDigits>,
    pub min_sig_digits: f64,
    pub ds_residual: f64,
    /// max |published - uniform-grid solution|: diagnoses rows whose digits
    /// came from the unshifted closure instead of the printed spacings.
    pub uniform_distance: Option<f64>,
}

impl SchemeValidation {
    pub fn passes(&self, digits: f64) -> bool {
        self.trailing_interior_ok && self.min_sig_digits >= digits
    }
}

fn sig_digits(published: f64, derived: f64) -> f64 {
    let denom = published.abs().max(1e-300);
    let rel = ((published - derived) / denom).abs();
    if rel == 0.0 {
        17.0
    } else {
        (-rel.log10()).min(17.0)
    }
}

/// Re-derive the weights from the published grid and count matching digits.
pub fn validate(order: usize, shifts: usize) -> Result<SchemeValidation> {
    let g = golden(order, shifts).ok_or(Error::UnknownScheme { order, shifts })?;
    let p = order / 2;
    let stencil = InteriorStencil::new(p);
    let sp = ShiftParams::from_strings(g.h_params)?;
    let ds = ds_solution(&stencil, &sp)?;
    let n2 = 2 * p;
    let mut trailing_interior_ok = true;
    for s in g.mu.iter().skip(n2) {
        if Dd::parse(s)?.to_f64() != 1.0 {
            trailing_interior_ok = false;
        }
    }
    let mut weights = Vec::new();
    let mut min_sig = f64::INFINITY;
    for (index, s) in g.mu.iter().take(n2).enumerate() {
        let published = Dd::parse(s)?.to_f64();
        let derived = ds.mu[index];
        let d = sig_digits(published, derived);
        min_sig = min_sig.min(d);
        weights.push(WeightDigits { index, published, derived, sig_digits: d });
    }
    let uniform_distance = if g.mu.is_empty() {
        None
    } else {
        let uni = ds_solution(&stencil, &ShiftParams::none())?;
        Some(
            g.mu.iter()
                .take(n2)
                .enumerate()
                .map(|(i, s)| (Dd::parse(s).unwrap().to_f64() - uni.mu[i]).abs())
                .fold(0.0f64, f64::max),
        )
    };
    let min_sig_digits = if weights.is_empty() { f64::NAN } else { min_sig };
    Ok(SchemeValidation {
        order,
        shifts,
        published_len: g.mu.len(),
        trailing_interior_ok,
        weights,
        min_sig_digits,
        ds_residual: ds.residual,
        uniform_distance,
    })
}

/// Weights derived from the published grid of (order, shifts); the canonical
/// source for operator construction (published digits are compared against
/// these, not substituted for them).
pub fn derived_weights(order: usize, shifts: usize) -> Result<DsSolution> {
    let p = order / 2;
    let stencil = InteriorStencil::new(p);
    let sp = shift_params(order, shifts)?;
    ds_solution(&stencil, &sp)
}
