//! Named sweep presets for the `figure` subcommand.

use std::fmt;
use std::str::FromStr;

use crate::config::{parse_config, Command, SweepConfig};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3a,
    Fig3b,
    Fig5,
    Fig6,
    Fig8,
}

impl Figure {
    pub const ALL: [Figure; 6] = [Figure::Fig2, Figure::Fig3a, Figure::Fig3b, Figure::Fig5, Figure::Fig6, Figure::Fig8];

    pub fn name(&self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3a => "fig3a",
            Figure::Fig3b => "fig3b",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig8 => "fig8",
        }
    }

    pub fn command(&self) -> Command {
        match self {
            Figure::Fig2 | Figure::Fig3a | Figure::Fig3b => Command::Analytic,
            Figure::Fig5 | Figure::Fig6 => Command::Protocol,
            Figure::Fig8 => Command::Storage,
        }
    }

    fn preset(&self) -> &'static str {
        match self {
            Figure::Fig2 => "n = 2\np_max = 1\np_steps = 200",
            Figure::Fig3a | Figure::Fig3b => "n = 2, 3, 4\np_max = 1\np_steps = 200",
            Figure::Fig5 => "protocol = fig4\nerrors = R1X\nt1 = 300ns, 500ns, 700ns\ntheta_steps = 100",
            Figure::Fig6 => "protocol = fig4\nerrors = R1X, R1Y, R2Y, R2Z\nt1 = 500ns\ntheta_steps = 100",
            Figure::Fig8 => "t1 = inf, 300ns, 500ns, 700ns\np_max = 0.5\np_steps = 50",
        }
    }

    /// Preset config with `overrides` applied on top.
    pub fn config(&self, overrides: Option<SweepConfig>) -> Result<SweepConfig, CliError> {
        let base = parse_config(self.preset())?;
        Ok(match overrides {
            Some(o) => base.merged(o),
            None => base,
        })
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown figure '{s}' (expected fig2, fig3a, fig3b, fig5, fig6 or fig8)"))
    }
}
