use spinrelax::evolution::{evolve_grid, markovian_term, non_markovian_term, uniform_grid};
use spinrelax::spectral::{LowerLimit, SpectralResult};
use spinrelax::units::{inverse_meter_to_mev, mev_inverse_to_seconds, mev_to_hertz, oersted_to_tesla, seconds_to_mev_inverse};
use spinrelax::{CouplingParams, EvolutionParams, ParticleSpec};

/// Upper bound on samples per request, to keep the page responsive.
pub const MAX_POINTS: usize = 20_000;

#[derive(Debug, Clone, Copy)]
pub struct Inputs {
    coupling: CouplingParams,
    params: EvolutionParams,
}

/// Column-major table: first column is time in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Columns {
    pub t_seconds: Vec<f64>,
    pub series: Vec<Vec<f64>>,
}

impl Columns {
    pub fn flatten(self) -> Vec<f64> {
        let mut out = self.t_seconds;
        for s in self.series {
            out.extend(s);
        }
        out
    }
}

fn check_points(points: usize) -> Result<(), String> {
    if (2..=MAX_POINTS).contains(&points) {
        Ok(())
    } else {
        Err(format!("points must be between 2 and {MAX_POINTS}, got {points}"))
    }
}

impl Inputs {
    /// Proton in `hz_oe` static and `h1_oe` rotating field, line half-width in m⁻¹.
    pub fn new(hz_oe: f64, h1_oe: f64, delta_per_m: f64) -> Result<Self, String> {
        let coupling = CouplingParams::from_fields(
            ParticleSpec::proton(),
            oersted_to_tesla(hz_oe),
            oersted_to_tesla(h1_oe),
            inverse_meter_to_mev(delta_per_m),
        )
        .map_err(|e| e.to_string())?;
        let params = EvolutionParams::from_coupling(&coupling).map_err(|e| e.to_string())?;
        Ok(Self { coupling, params })
    }

    pub fn params(&self) -> &EvolutionParams {
        &self.params
    }

    pub fn rates(&self) -> Result<Vec<f64>, String> {
        let s = SpectralResult::compute(&self.coupling, LowerLimit::Zero).map_err(|e| e.to_string())?;
        let p = &self.params;
        let w_per_s = 1.0 / mev_inverse_to_seconds(1.0 / s.rate_w);
        Ok(vec![
            p.omega0(),
            mev_to_hertz(p.omega0()) * 1e-6,
            p.delta(),
            p.ratio_sq(),
            s.gamma,
            w_per_s,
            1.0 / w_per_s,
            s.energy_shift,
        ])
    }

    pub fn evolution(&self, relaxation_times: f64, points: usize) -> Result<Columns, String> {
        check_points(points)?;
        if !(relaxation_times.is_finite() && relaxation_times > 0.0) {
            return Err("span must be a positive number of relaxation times".into());
        }
        let tau = self.params.relaxation_time();
        if !tau.is_finite() {
            return Err("no decay without a rotating field".into());
        }
        let grid = uniform_grid(relaxation_times * tau, points).map_err(|e| e.to_string())?;
        let pts = evolve_grid(&self.params, &grid).map_err(|e| e.to_string())?;
        Ok(Columns {
            t_seconds: pts.iter().map(|p| mev_inverse_to_seconds(p.t)).collect(),
            series: vec![
                pts.iter().map(|p| p.markovian).collect(),
                pts.iter().map(|p| p.non_markovian).collect(),
            ],
        })
    }

    pub fn larmor_window(&self, periods: f64, points: usize) -> Result<Columns, String> {
        check_points(points)?;
        if !(periods.is_finite() && periods > 0.0 && periods <= 1e4) {
            return Err("periods must be in (0, 10000]".into());
        }
        let t_max = periods * std::f64::consts::TAU / self.params.omega0();
        let grid = uniform_grid(t_max, points).map_err(|e| e.to_string())?;
        let nm = grid
            .iter()
            .map(|&t| non_markovian_term(&self.params, t))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| e.to_string())?;
        Ok(Columns {
            t_seconds: grid.iter().map(|&t| mev_inverse_to_seconds(t)).collect(),
            series: vec![nm],
        })
    }

    /// Markovian survival probability at a wall-clock time.
    pub fn markovian_at(&self, t_seconds: f64) -> Result<f64, String> {
        markovian_term(&self.params, seconds_to_mev_inverse(t_seconds)).map_err(|e| e.to_string())
    }
}
