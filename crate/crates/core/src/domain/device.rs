use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::DomainError;
use crate::time::Nanos;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DeviceId(String);

impl DeviceId {
    pub fn new(id: impl Into<String>) -> Self {
        DeviceId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DeviceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for DeviceId {
    fn from(s: &str) -> Self {
        DeviceId::new(s)
    }
}

/// Independently schedulable hardware resource on a device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum UnitKind {
    #[serde(rename = "cpu")]
    Cpu,
    #[serde(rename = "accel")]
    Accelerator,
    #[serde(rename = "radio")]
    Radio,
}

impl UnitKind {
    pub const ALL: [UnitKind; 3] = [UnitKind::Cpu, UnitKind::Accelerator, UnitKind::Radio];

    pub fn as_str(self) -> &'static str {
        match self {
            UnitKind::Cpu => "cpu",
            UnitKind::Accelerator => "accel",
            UnitKind::Radio => "radio",
        }
    }
}

impl fmt::Display for UnitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Memory transfer cost fitted as `slope * bytes + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinearCost {
    pub slope_ns_per_byte: f64,
    pub intercept: Nanos,
}

impl LinearCost {
    pub const ZERO: LinearCost = LinearCost {
        slope_ns_per_byte: 0.0,
        intercept: Nanos::ZERO,
    };

    pub fn new(slope_ns_per_byte: f64, intercept: Nanos) -> Self {
        LinearCost {
            slope_ns_per_byte,
            intercept,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensorSpec {
    #[serde(rename = "type")]
    pub sensor_type: String,
    pub sample_bytes: u64,
    #[serde(rename = "latency_ns")]
    pub latency: Nanos,
}

/// Average power draw per computation unit, in watts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UnitPower {
    pub cpu: f64,
    pub accel: f64,
    pub radio: f64,
}

impl UnitPower {
    pub fn watts(&self, unit: UnitKind) -> f64 {
        match unit {
            UnitKind::Cpu => self.cpu,
            UnitKind::Accelerator => self.accel,
            UnitKind::Radio => self.radio,
        }
    }
}

/// A simulated wearable with one tiny AI accelerator, a host processor and a radio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DeviceRecord", into = "DeviceRecord")]
pub struct DeviceProfile {
    pub id: DeviceId,
    pub weight_capacity: u64,
    pub bias_capacity: u64,
    pub max_layers: u32,
    pub parallel_processors: u32,
    pub clock_hz: u64,
    pub load_cost: LinearCost,
    pub unload_cost: LinearCost,
    pub radio_bandwidth_bps: u64,
    pub radio_fixed_overhead: Nanos,
    pub sensors: Vec<SensorSpec>,
    pub interfaces: BTreeSet<String>,
    pub unit_power: UnitPower,
    pub radio_energy_nj_per_byte: f64,
}

impl DeviceProfile {
    pub fn sensor(&self, sensor_type: &str) -> Option<&SensorSpec> {
        self.sensors.iter().find(|s| s.sensor_type == sensor_type)
    }

    pub fn has_interface(&self, interface: &str) -> bool {
        self.interfaces.contains(interface)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let bad = |field: &'static str, reason: &str| DomainError::InvalidProfile {
            device: self.id.to_string(),
            field,
            reason: reason.to_string(),
        };
        if self.id.as_str().is_empty() {
            return Err(bad("id", "must be nonempty"));
        }
        if self.weight_capacity == 0 {
            return Err(bad("weight_capacity_bytes", "must be > 0"));
        }
        if self.bias_capacity == 0 {
            return Err(bad("bias_capacity_bytes", "must be > 0"));
        }
        if self.max_layers == 0 {
            return Err(bad("max_layers", "must be >= 1"));
        }
        if self.parallel_processors == 0 {
            return Err(bad("parallel_processors", "must be >= 1"));
        }
        if self.clock_hz == 0 {
            return Err(bad("clock_hz", "must be > 0"));
        }
        if !nonnegative(self.load_cost.slope_ns_per_byte) {
            return Err(bad("load_slope_ns_per_byte", "must be finite and >= 0"));
        }
        if !nonnegative(self.unload_cost.slope_ns_per_byte) {
            return Err(bad("unload_slope_ns_per_byte", "must be finite and >= 0"));
        }
        if self.radio_bandwidth_bps == 0 {
            return Err(bad("radio_bandwidth_bps", "must be > 0"));
        }
        for unit in UnitKind::ALL {
            if !nonnegative(self.unit_power.watts(unit)) {
                return Err(bad("unit_power_w", "must be finite and >= 0"));
            }
        }
        if !nonnegative(self.radio_energy_nj_per_byte) {
            return Err(bad("radio_energy_nj_per_byte", "must be finite and >= 0"));
        }
        let mut seen = BTreeSet::new();
        for sensor in &self.sensors {
            if sensor.sensor_type.is_empty() {
                return Err(bad("sensors", "sensor type must be nonempty"));
            }
            if sensor.sample_bytes == 0 {
                return Err(bad("sensors", "sample_bytes must be > 0"));
            }
            if !seen.insert(sensor.sensor_type.as_str()) {
                return Err(bad("sensors", "duplicate sensor type"));
            }
        }
        if self.interfaces.iter().any(String::is_empty) {
            return Err(bad("interfaces", "interface tag must be nonempty"));
        }
        Ok(())
    }
}

fn nonnegative(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

/// Raw device record with the on-disk field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceRecord {
    pub id: String,
    pub weight_capacity_bytes: u64,
    pub bias_capacity_bytes: u64,
    pub max_layers: u32,
    pub parallel_processors: u32,
    pub clock_hz: u64,
    pub load_slope_ns_per_byte: f64,
    pub load_intercept_ns: u64,
    pub unload_slope_ns_per_byte: f64,
    pub unload_intercept_ns: u64,
    pub radio_bandwidth_bps: u64,
    #[serde(default)]
    pub radio_overhead_ns: u64,
    pub unit_power_w: UnitPower,
    #[serde(default)]
    pub radio_energy_nj_per_byte: f64,
    #[serde(default)]
    pub sensors: Vec<SensorSpec>,
    #[serde(default)]
    pub interfaces: Vec<String>,
}

/// Converts a parsed record into a profile, rejecting the first violated invariant.
pub fn validate_device(record: DeviceRecord) -> Result<DeviceProfile, DomainError> {
    let profile = DeviceProfile {
        id: DeviceId::new(record.id),
        weight_capacity: record.weight_capacity_bytes,
        bias_capacity: record.bias_capacity_bytes,
        max_layers: record.max_layers,
        parallel_processors: record.parallel_processors,
        clock_hz: record.clock_hz,
        load_cost: LinearCost::new(
            record.load_slope_ns_per_byte,
            Nanos(record.load_intercept_ns),
        ),
        unload_cost: LinearCost::new(
            record.unload_slope_ns_per_byte,
            Nanos(record.unload_intercept_ns),
        ),
        radio_bandwidth_bps: record.radio_bandwidth_bps,
        radio_fixed_overhead: Nanos(record.radio_overhead_ns),
        sensors: record.sensors,
        interfaces: record.interfaces.into_iter().collect(),
        unit_power: record.unit_power_w,
        radio_energy_nj_per_byte: record.radio_energy_nj_per_byte,
    };
    profile.validate()?;
    Ok(profile)
}

impl TryFrom<DeviceRecord> for DeviceProfile {
    type Error = DomainError;

    fn try_from(record: DeviceRecord) -> Result<Self, Self::Error> {
        validate_device(record)
    }
}

impl From<DeviceProfile> for DeviceRecord {
    fn from(p: DeviceProfile) -> Self {
        DeviceRecord {
            id: p.id.0,
            weight_capacity_bytes: p.weight_capacity,
            bias_capacity_bytes: p.bias_capacity,
            max_layers: p.max_layers,
            parallel_processors: p.parallel_processors,
            clock_hz: p.clock_hz,
            load_slope_ns_per_byte: p.load_cost.slope_ns_per_byte,
            load_intercept_ns: p.load_cost.intercept.0,
            unload_slope_ns_per_byte: p.unload_cost.slope_ns_per_byte,
            unload_intercept_ns: p.unload_cost.intercept.0,
            radio_bandwidth_bps: p.radio_bandwidth_bps,
            radio_overhead_ns: p.radio_fixed_overhead.0,
            unit_power_w: p.unit_power,
            radio_energy_nj_per_byte: p.radio_energy_nj_per_byte,
            sensors: p.sensors,
            interfaces: p.interfaces.into_iter().collect(),
        }
    }
}

/// Devices sorted by id; positions are the dense device indices used by the planner.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSet {
    devices: Vec<DeviceProfile>,
}

impl DeviceSet {
    pub fn new(mut devices: Vec<DeviceProfile>) -> Result<Self, DomainError> {
        for d in &devices {
            d.validate()?;
        }
        devices.sort_by(|a, b| a.id.cmp(&b.id));
        if let Some(w) = devices.windows(2).find(|w| w[0].id == w[1].id) {
            return Err(DomainError::Duplicate {
                what: "device",
                id: w[0].id.to_string(),
            });
        }
        Ok(DeviceSet { devices })
    }

    pub fn len(&self) -> usize {
        self.devices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.devices.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DeviceProfile> {
        self.devices.iter()
    }

    pub fn as_slice(&self) -> &[DeviceProfile] {
        &self.devices
    }

    pub fn get(&self, index: usize) -> &DeviceProfile {
        &self.devices[index]
    }

    pub fn index_of(&self, id: &DeviceId) -> Option<usize> {
        self.devices.binary_search_by(|d| d.id.cmp(id)).ok()
    }

    pub fn by_id(&self, id: &DeviceId) -> Option<&DeviceProfile> {
        self.index_of(id).map(|i| &self.devices[i])
    }
}

impl<'a> IntoIterator for &'a DeviceSet {
    type Item = &'a DeviceProfile;
    type IntoIter = std::slice::Iter<'a, DeviceProfile>;

    fn into_iter(self) -> Self::IntoIter {
        self.devices.iter()
    }
}
