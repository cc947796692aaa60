//! Values tagged with a unit, written as `"<number> <unit>"`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Nanometre,
    InverseSquareNanometre,
    VoltPerMetre,
    MilliElectronVolt,
    MicroElectronVolt,
    Second,
    Kelvin,
    KelvinNanometre,
    MilliJoulePerSquareMetre,
    CubicMetrePerMole,
    JoulePerMole,
    AtomicMassUnit,
    SquareMillimetrePerSecond,
    KilogramPerSquareSecondPerVoltPerMetre,
    Dimensionless,
}

impl Unit {
    pub const ALL: [Unit; 15] = [
        Unit::Nanometre,
        Unit::InverseSquareNanometre,
        Unit::VoltPerMetre,
        Unit::MilliElectronVolt,
        Unit::MicroElectronVolt,
        Unit::Second,
        Unit::Kelvin,
        Unit::KelvinNanometre,
        Unit::MilliJoulePerSquareMetre,
        Unit::CubicMetrePerMole,
        Unit::JoulePerMole,
        Unit::AtomicMassUnit,
        Unit::SquareMillimetrePerSecond,
        Unit::KilogramPerSquareSecondPerVoltPerMetre,
        Unit::Dimensionless,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Unit::Nanometre => "nm",
            Unit::InverseSquareNanometre => "nm^-2",
            Unit::VoltPerMetre => "V/m",
            Unit::MilliElectronVolt => "meV",
            Unit::MicroElectronVolt => "ueV",
            Unit::Second => "s",
            Unit::Kelvin => "K",
            Unit::KelvinNanometre => "K*nm",
            Unit::MilliJoulePerSquareMetre => "mJ/m^2",
            Unit::CubicMetrePerMole => "m^3/mol",
            Unit::JoulePerMole => "J/mol",
            Unit::AtomicMassUnit => "u",
            Unit::SquareMillimetrePerSecond => "mm^2/s",
            Unit::KilogramPerSquareSecondPerVoltPerMetre => "kg/s^2/(V/m)",
            Unit::Dimensionless => "1",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Unit::ALL
            .into_iter()
            .find(|u| u.symbol() == s)
            .ok_or_else(|| Error::Parse(format!("unknown unit '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub unit: Unit,
}

impl Quantity {
    pub fn new(value: f64, unit: Unit) -> Self {
        Self { value, unit }
    }

    /// Value in `expected`, or an error naming the mismatch.
    pub fn expect(&self, expected: Unit) -> Result<f64> {
        if self.unit == expected {
            Ok(self.value)
        } else {
            Err(Error::Parse(format!("expected a value in {expected}, got {self}")))
        }
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.value.is_infinite() && self.value > 0.0 {
            write!(f, "inf {}", self.unit)
        } else {
            write!(f, "{:?} {}", self.value, self.unit)
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (number, unit) = s
            .trim()
            .split_once(char::is_whitespace)
            .ok_or_else(|| Error::Parse(format!("'{s}' must be '<number> <unit>'")))?;
        let value: f64 = number
            .parse()
            .map_err(|_| Error::Parse(format!("'{number}' is not a number")))?;
        if value.is_nan() {
            return Err(Error::Parse(format!("'{s}' is not a number")));
        }
        Ok(Self {
            value,
            unit: unit.trim().parse()?,
        })
    }
}
