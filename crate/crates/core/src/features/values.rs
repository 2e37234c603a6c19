use crate::scalar::Real;

/// Values of one feature class in canonical name order.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassValues<T> {
    names: &'static [&'static str],
    values: Vec<T>,
}

impl<T: Real> ClassValues<T> {
    pub fn names(&self) -> &'static [&'static str] {
        self.names
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.names.iter().position(|&n| n == name).map(|k| self.values[k])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, T)> + '_ {
        self.names.iter().copied().zip(self.values.iter().copied())
    }

    /// Element-wise mean of per-direction values.
    pub(crate) fn average(names: &'static [&'static str], parts: &[ClassValues<T>]) -> Self {
        let count = T::from_count(parts.len());
        let values = (0..names.len()).map(|k| parts.iter().map(|p| p.values[k]).sum::<T>() / count).collect();
        Self { names, values }
    }
}

/// Collects values by name and emits them in canonical order.
pub(crate) struct ClassBuilder<T> {
    names: &'static [&'static str],
    slots: Vec<Option<T>>,
}

impl<T: Real> ClassBuilder<T> {
    pub(crate) fn new(names: &'static [&'static str]) -> Self {
        Self { names, slots: vec![None; names.len()] }
    }

    pub(crate) fn set(&mut self, name: &str, value: T) {
        let k = self.names.iter().position(|&n| n == name).unwrap_or_else(|| panic!("unknown feature {name}"));
        self.slots[k] = Some(value);
    }

    pub(crate) fn finish(self) -> ClassValues<T> {
        let values = self
            .slots
            .iter()
            .zip(self.names)
            .map(|(v, n)| v.unwrap_or_else(|| panic!("feature {n} was not computed")))
            .collect();
        ClassValues { names: self.names, values }
    }
}
