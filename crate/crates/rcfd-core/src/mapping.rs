use std::collections::BTreeMap;

use crate::error::CoreError;

/// Index of a node in the network, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

/// A contention slot: one OFDM subcarrier plus the symbol value carried
/// on it. With a plain mapping (modulation order 1) the symbol is
/// always 0 and a slot is just a subcarrier. Slots are ordered by
/// subcarrier index first, then by symbol value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub subcarrier: u16,
    pub symbol: u16,
}

impl Slot {
    pub fn new(subcarrier: u16, symbol: u16) -> Self {
        Slot { subcarrier, symbol }
    }
}

/// The static node-to-subcarrier association every frequency-domain
/// protocol run shares. The subcarrier set is split in two halves:
/// `f1` maps each node into the lower half, `f2` into the upper half.
/// With modulation order `m > 1` each subcarrier hosts `m` symbol
/// values, so up to `m * S / 2` nodes can be mapped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubcarrierMap {
    subcarriers: u16,
    modulation_order: u16,
    f1: Vec<Slot>,
    f2: Vec<Slot>,
    inverse_f1: BTreeMap<Slot, NodeId>,
    inverse_f2: BTreeMap<Slot, NodeId>,
}

impl SubcarrierMap {
    /// The canonical mapping: node `i` occupies slot `i` of the lower
    /// half for `f1` and the matching slot of the upper half for `f2`,
    /// filling all symbol values of a subcarrier before moving to the
    /// next one.
    pub fn default_mapping(
        nodes: usize,
        subcarriers: u16,
        modulation_order: u16,
    ) -> Result<Self, CoreError> {
        if subcarriers < 2 || subcarriers % 2 != 0 {
            return Err(CoreError::InvalidSubcarrierCount(subcarriers));
        }
        if modulation_order < 1 {
            return Err(CoreError::InvalidModulationOrder(modulation_order));
        }
        let capacity = modulation_order as usize * subcarriers as usize / 2;
        if nodes > capacity {
            return Err(CoreError::CapacityExceeded { nodes, capacity });
        }
        let half = subcarriers / 2;
        let mut f1 = Vec::with_capacity(nodes);
        let mut f2 = Vec::with_capacity(nodes);
        for i in 0..nodes {
            let sc = (i / modulation_order as usize) as u16;
            let sym = (i % modulation_order as usize) as u16;
            f1.push(Slot::new(sc, sym));
            f2.push(Slot::new(half + sc, sym));
        }
        Ok(Self::from_parts(subcarriers, modulation_order, f1, f2))
    }

    fn from_parts(subcarriers: u16, modulation_order: u16, f1: Vec<Slot>, f2: Vec<Slot>) -> Self {
        let inverse_f1 = f1
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, NodeId(i)))
            .collect();
        let inverse_f2 = f2
            .iter()
            .enumerate()
            .map(|(i, s)| (*s, NodeId(i)))
            .collect();
        SubcarrierMap {
            subcarriers,
            modulation_order,
            f1,
            f2,
            inverse_f1,
            inverse_f2,
        }
    }

    pub fn subcarriers(&self) -> u16 {
        self.subcarriers
    }

    pub fn modulation_order(&self) -> u16 {
        self.modulation_order
    }

    pub fn mapped_nodes(&self) -> usize {
        self.f1.len()
    }

    /// Total number of distinct contention slots (`m * S`).
    pub fn slot_count(&self) -> usize {
        self.modulation_order as usize * self.subcarriers as usize
    }

    pub fn f1(&self, node: NodeId) -> Result<Slot, CoreError> {
        self.f1
            .get(node.0)
            .copied()
            .ok_or(CoreError::UnmappedNode(node))
    }

    pub fn f2(&self, node: NodeId) -> Result<Slot, CoreError> {
        self.f2
            .get(node.0)
            .copied()
            .ok_or(CoreError::UnmappedNode(node))
    }

    /// Node owning a slot of the lower half.
    pub fn node_at_f1(&self, slot: Slot) -> Result<NodeId, CoreError> {
        self.inverse_f1
            .get(&slot)
            .copied()
            .ok_or(CoreError::UnknownSlot(slot))
    }

    /// Node owning a slot of the upper half.
    pub fn node_at_f2(&self, slot: Slot) -> Result<NodeId, CoreError> {
        self.inverse_f2
            .get(&slot)
            .copied()
            .ok_or(CoreError::UnknownSlot(slot))
    }

    /// Whether a slot sits in the lower half of the subcarrier set.
    pub fn in_set1(&self, slot: Slot) -> bool {
        slot.subcarrier < self.subcarriers / 2
    }
}
