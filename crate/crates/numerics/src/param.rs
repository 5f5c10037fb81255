//! Named trainable parameters and parameter sets.

use std::collections::BTreeMap;

use crate::{Array, Rng};

/// One named tensor with its gradient accumulator and Adam state. Value,
/// gradient and both moments always share a shape.
#[derive(Clone, Debug)]
pub struct Parameter {
    pub name: String,
    pub value: Array,
    pub gradient: Array,
    pub trainable: bool,
    pub adam_m: Array,
    pub adam_v: Array,
    pub step_count: u64,
}

impl Parameter {
    pub fn new(name: impl Into<String>, value: Array, trainable: bool) -> Parameter {
        let zeros = Array::zeros(value.shape());
        Parameter {
            name: name.into(),
            value,
            gradient: zeros.clone(),
            trainable,
            adam_m: zeros.clone(),
            adam_v: zeros,
            step_count: 0,
        }
    }
}

/// Ordered map of parameters. BTreeMap keeps iteration (and therefore
/// checkpoint bytes and training order) deterministic.
#[derive(Clone, Debug, Default)]
pub struct ParamSet {
    map: BTreeMap<String, Parameter>,
}

impl ParamSet {
    pub fn new() -> ParamSet {
        ParamSet::default()
    }

    pub fn insert(&mut self, p: Parameter) {
        assert!(
            !self.map.contains_key(&p.name),
            "duplicate parameter `{}`",
            p.name
        );
        self.map.insert(p.name.clone(), p);
    }

    /// Register a Glorot-uniform initialized matrix parameter. The init
    /// stream is derived from the parameter name, so values do not depend on
    /// registration order.
    pub fn init_glorot(
        &mut self,
        rng: &Rng,
        name: &str,
        fan_in: usize,
        fan_out: usize,
        shape: &[usize],
        trainable: bool,
    ) {
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let mut stream = rng.substream(&format!("init.{name}"));
        let n: usize = shape.iter().product();
        let data: Vec<f64> = (0..n).map(|_| stream.uniform_range(-bound, bound)).collect();
        self.insert(Parameter::new(
            name,
            Array::new(shape.to_vec(), data).expect("finite init"),
            trainable,
        ));
    }

    pub fn init_zeros(&mut self, name: &str, shape: &[usize], trainable: bool) {
        self.insert(Parameter::new(name, Array::zeros(shape), trainable));
    }

    pub fn init_const(&mut self, name: &str, shape: &[usize], v: f64, trainable: bool) {
        self.insert(Parameter::new(
            name,
            Array::full(shape, v).expect("finite init"),
            trainable,
        ));
    }

    pub fn get(&self, name: &str) -> &Parameter {
        self.map
            .get(name)
            .unwrap_or_else(|| panic!("unknown parameter `{name}`"))
    }

    pub fn try_get(&self, name: &str) -> Option<&Parameter> {
        self.map.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> &mut Parameter {
        self.map
            .get_mut(name)
            .unwrap_or_else(|| panic!("unknown parameter `{name}`"))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.map.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Parameter)> {
        self.map.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&String, &mut Parameter)> {
        self.map.iter_mut()
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.map.keys()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn total_values(&self) -> usize {
        self.map.values().map(|p| p.value.len()).sum()
    }

    pub fn set_trainable(&mut self, trainable: bool) {
        for p in self.map.values_mut() {
            p.trainable = trainable;
        }
    }

    pub fn any_trainable(&self) -> bool {
        self.map.values().any(|p| p.trainable)
    }

    pub fn zero_gradients(&mut self) {
        for p in self.map.values_mut() {
            p.gradient.fill(0.0);
        }
    }

    /// FNV-1a fingerprint over names and value bytes; changes iff any value
    /// bit changes. Used by the freezing checks.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xCBF2_9CE4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01B3);
            }
        };
        for (name, p) in &self.map {
            eat(name.as_bytes());
            eat(&p.value.le_bytes());
        }
        h
    }
}
