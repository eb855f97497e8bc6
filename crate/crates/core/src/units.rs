//! Physical constants and display-unit conversions.
//!
//! Everything inside the crate is SI (m, s, W, rad/s). The helpers here are
//! used only where values enter from design files or leave for display.

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const HBAR: f64 = 1.054_571_817e-34;

pub const NM: f64 = 1e-9;
pub const UM: f64 = 1e-6;
pub const UM2: f64 = 1e-12;
pub const PS: f64 = 1e-12;
pub const FS2_PER_MM: f64 = 1e-27;
pub const GHZ: f64 = 1e9;
pub const MHZ: f64 = 1e6;
pub const MW: f64 = 1e-3;
pub const RAD_PER_PS: f64 = 1e12;

/// A display unit that can be converted to and from SI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisplayUnit {
    Nanometre,
    Micrometre,
    SquareMicrometre,
    Picosecond,
    Fs2PerMm,
    Gigahertz,
    Megahertz,
    Milliwatt,
    RadPerPs,
}

impl DisplayUnit {
    pub const ALL: [DisplayUnit; 9] = [
        DisplayUnit::Nanometre,
        DisplayUnit::Micrometre,
        DisplayUnit::SquareMicrometre,
        DisplayUnit::Picosecond,
        DisplayUnit::Fs2PerMm,
        DisplayUnit::Gigahertz,
        DisplayUnit::Megahertz,
        DisplayUnit::Milliwatt,
        DisplayUnit::RadPerPs,
    ];

    pub fn scale(self) -> f64 {
        match self {
            DisplayUnit::Nanometre => NM,
            DisplayUnit::Micrometre => UM,
            DisplayUnit::SquareMicrometre => UM2,
            DisplayUnit::Picosecond => PS,
            DisplayUnit::Fs2PerMm => FS2_PER_MM,
            DisplayUnit::Gigahertz => GHZ,
            DisplayUnit::Megahertz => MHZ,
            DisplayUnit::Milliwatt => MW,
            DisplayUnit::RadPerPs => RAD_PER_PS,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            DisplayUnit::Nanometre => "nm",
            DisplayUnit::Micrometre => "um",
            DisplayUnit::SquareMicrometre => "um^2",
            DisplayUnit::Picosecond => "ps",
            DisplayUnit::Fs2PerMm => "fs^2/mm",
            DisplayUnit::Gigahertz => "GHz",
            DisplayUnit::Megahertz => "MHz",
            DisplayUnit::Milliwatt => "mW",
            DisplayUnit::RadPerPs => "rad/ps",
        }
    }

    pub fn to_si(self, value: f64) -> f64 {
        value * self.scale()
    }

    pub fn from_si(self, value: f64) -> f64 {
        value / self.scale()
    }
}

/// Angular frequency for a vacuum wavelength.
pub fn angular_frequency(wavelength: f64) -> f64 {
    2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / wavelength
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}
