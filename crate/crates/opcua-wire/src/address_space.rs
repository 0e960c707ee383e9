//! The node tree the server exposes and the lock-free cells behind it.
//!
//! Layout (namespace 2 unless noted):
//!
//! ```text
//! Root (ns=0;i=84)
//! └── Objects (ns=0;i=85)
//!     ├── Fan0   (i=1)   ── Voltage   (i=2,  read only)
//!     ├── Fan1   (i=3)   ── Voltage   (i=4,  read only)
//!     ├── Beam   (i=5)   ── Yaw       (i=6,  read only)
//!     │                  ── Pitch     (i=7,  read only)
//!     │                  ── YawDot    (i=8,  read only)
//!     │                  ── PitchDot  (i=9,  read only)
//!     └── Target (i=10)  ── TargetYaw   (i=11, writable)
//!                        ── TargetPitch (i=12, writable)
//! ```
//!
//! Each variable holds one `f64` plus a source timestamp in a seqlock cell:
//! the publisher thread updates all eight cells at the sample rate while
//! client sessions read them, and neither side ever blocks the other.

use std::collections::HashMap;
use std::sync::atomic::{AtomicI64, AtomicU64, Ordering};
use std::sync::Mutex;

use crate::codec::{now_ticks, NodeId};
use crate::messages::{REF_HAS_COMPONENT, REF_ORGANIZES};

/// Namespace index of the device nodes.
pub const DEVICE_NAMESPACE: u16 = 2;

/// Number of variables the publisher refreshes each sample.
pub const PUBLISHED_VAR_COUNT: usize = 8;

const ROOT_ID: NodeId = NodeId::numeric(0, 84);
const OBJECTS_ID: NodeId = NodeId::numeric(0, 85);

const TYPE_FOLDER: u32 = 61;
const TYPE_BASE_OBJECT: u32 = 58;
const TYPE_BASE_DATA_VARIABLE: u32 = 63;

const fn device(id: u32) -> NodeId {
    NodeId::numeric(DEVICE_NAMESPACE, id)
}

/// Node ids refreshed by the publisher, in replicated-variable order:
/// both fan voltages, yaw, pitch, both targets, then the two rates.
pub const fn published_nodes() -> [NodeId; PUBLISHED_VAR_COUNT] {
    [
        device(2),
        device(4),
        device(6),
        device(7),
        device(11),
        device(12),
        device(8),
        device(9),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Object,
    Variable,
}

impl NodeClass {
    /// Wire value used in browse results.
    pub fn wire(self) -> u32 {
        match self {
            NodeClass::Object => 1,
            NodeClass::Variable => 2,
        }
    }
}

/// Seqlock around one value+timestamp pair. Writers take the mutex (client
/// writes race the publisher), bump the sequence to odd, store both words and
/// bump back to even; readers retry until they see a stable even sequence.
struct Cell {
    seq: AtomicU64,
    bits: AtomicU64,
    stamp: AtomicI64,
    write_lock: Mutex<()>,
}

impl Cell {
    fn new(value: f64, stamp: i64) -> Cell {
        Cell {
            seq: AtomicU64::new(0),
            bits: AtomicU64::new(value.to_bits()),
            stamp: AtomicI64::new(stamp),
            write_lock: Mutex::new(()),
        }
    }

    fn store(&self, value: f64, stamp: i64) {
        let _guard = self.write_lock.lock().expect("cell writer poisoned");
        let s = self.seq.load(Ordering::SeqCst);
        self.seq.store(s + 1, Ordering::SeqCst);
        self.bits.store(value.to_bits(), Ordering::SeqCst);
        self.stamp.store(stamp, Ordering::SeqCst);
        self.seq.store(s + 2, Ordering::SeqCst);
    }

    fn load(&self) -> (f64, i64) {
        loop {
            let before = self.seq.load(Ordering::SeqCst);
            if before & 1 == 1 {
                std::hint::spin_loop();
                continue;
            }
            let bits = self.bits.load(Ordering::SeqCst);
            let stamp = self.stamp.load(Ordering::SeqCst);
            if self.seq.load(Ordering::SeqCst) == before {
                return (f64::from_bits(bits), stamp);
            }
        }
    }
}

pub struct NodeDef {
    id: NodeId,
    name: &'static str,
    class: NodeClass,
    type_definition: u32,
    writable: bool,
    children: Vec<(u32, usize)>,
    cell: Option<Cell>,
}

impl NodeDef {
    pub fn id(&self) -> &NodeId {
        &self.id
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn class(&self) -> NodeClass {
        self.class
    }

    pub fn type_definition(&self) -> NodeId {
        NodeId::numeric(0, self.type_definition)
    }

    pub fn is_writable(&self) -> bool {
        self.writable
    }

    pub fn has_value(&self) -> bool {
        self.cell.is_some()
    }

    /// Namespace of the browse name; device nodes live in namespace 2,
    /// the two standard folders in namespace 0.
    pub fn name_namespace(&self) -> u16 {
        self.id.namespace
    }
}

fn folder(id: NodeId, name: &'static str) -> NodeDef {
    NodeDef {
        id,
        name,
        class: NodeClass::Object,
        type_definition: TYPE_FOLDER,
        writable: false,
        children: Vec::new(),
        cell: None,
    }
}

fn object(id: u32, name: &'static str) -> NodeDef {
    NodeDef {
        id: device(id),
        name,
        class: NodeClass::Object,
        type_definition: TYPE_BASE_OBJECT,
        writable: false,
        children: Vec::new(),
        cell: None,
    }
}

fn variable(id: u32, name: &'static str, writable: bool, stamp: i64) -> NodeDef {
    NodeDef {
        id: device(id),
        name,
        class: NodeClass::Variable,
        type_definition: TYPE_BASE_DATA_VARIABLE,
        writable,
        children: Vec::new(),
        cell: Some(Cell::new(0.0, stamp)),
    }
}

pub struct AddressSpace {
    nodes: Vec<NodeDef>,
    index: HashMap<NodeId, usize>,
}

impl AddressSpace {
    /// Builds the fixed two-fan rig exposed by the honeypot.
    pub fn honeypot() -> AddressSpace {
        let stamp = now_ticks();
        let mut nodes = vec![
            folder(ROOT_ID, "Root"),
            folder(OBJECTS_ID, "Objects"),
            object(1, "Fan0"),
            variable(2, "Voltage", false, stamp),
            object(3, "Fan1"),
            variable(4, "Voltage", false, stamp),
            object(5, "Beam"),
            variable(6, "Yaw", false, stamp),
            variable(7, "Pitch", false, stamp),
            variable(8, "YawDot", false, stamp),
            variable(9, "PitchDot", false, stamp),
            object(10, "Target"),
            variable(11, "TargetYaw", true, stamp),
            variable(12, "TargetPitch", true, stamp),
        ];
        let link = |nodes: &mut Vec<NodeDef>, parent: usize, reference: u32, child: usize| {
            nodes[parent].children.push((reference, child));
        };
        link(&mut nodes, 0, REF_ORGANIZES, 1);
        for child in [2, 4, 6, 11] {
            link(&mut nodes, 1, REF_ORGANIZES, child);
        }
        link(&mut nodes, 2, REF_HAS_COMPONENT, 3);
        link(&mut nodes, 4, REF_HAS_COMPONENT, 5);
        for child in [7, 8, 9, 10] {
            link(&mut nodes, 6, REF_HAS_COMPONENT, child);
        }
        link(&mut nodes, 11, REF_HAS_COMPONENT, 12);
        link(&mut nodes, 11, REF_HAS_COMPONENT, 13);

        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.id.clone(), i))
            .collect();
        AddressSpace { nodes, index }
    }

    pub fn lookup(&self, id: &NodeId) -> Option<&NodeDef> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    /// Children of a node in declaration order, paired with the numeric id
    /// of the reference that links them.
    pub fn children_of(&self, id: &NodeId) -> Option<Vec<(u32, &NodeDef)>> {
        let node = self.lookup(id)?;
        Some(
            node.children
                .iter()
                .map(|&(reference, child)| (reference, &self.nodes[child]))
                .collect(),
        )
    }

    /// Current value and source timestamp, if the node holds a value at all.
    pub fn read_value(&self, id: &NodeId) -> Option<(f64, i64)> {
        self.lookup(id)?.cell.as_ref().map(Cell::load)
    }

    /// Stores a value regardless of the node's writable flag; access control
    /// is the caller's job. Returns false when the node has no value cell.
    pub fn set_value(&self, id: &NodeId, value: f64, stamp: i64) -> bool {
        match self.lookup(id).and_then(|n| n.cell.as_ref()) {
            Some(cell) => {
                cell.store(value, stamp);
                true
            }
            None => false,
        }
    }

    /// Publishes one replicated sample across all eight variable cells.
    pub fn set_replicated(&self, values: &[f64; PUBLISHED_VAR_COUNT], stamp: i64) {
        for (id, &value) in published_nodes().iter().zip(values) {
            let stored = self.set_value(id, value, stamp);
            debug_assert!(stored, "published node {id} missing from address space");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::AtomicBool;
    use std::sync::Arc;

    #[test]
    fn layout_exposes_the_rig_with_correct_access_flags() {
        let space = AddressSpace::honeypot();

        let names = |id: &NodeId| -> Vec<&'static str> {
            space
                .children_of(id)
                .expect("node exists")
                .iter()
                .map(|(_, n)| n.name())
                .collect()
        };
        assert_eq!(names(&ROOT_ID), ["Objects"]);
        assert_eq!(names(&OBJECTS_ID), ["Fan0", "Fan1", "Beam", "Target"]);
        assert_eq!(names(&device(1)), ["Voltage"]);
        assert_eq!(names(&device(5)), ["Yaw", "Pitch", "YawDot", "PitchDot"]);
        assert_eq!(names(&device(10)), ["TargetYaw", "TargetPitch"]);

        for (reference, _) in space.children_of(&OBJECTS_ID).unwrap() {
            assert_eq!(reference, REF_ORGANIZES);
        }
        for (reference, _) in space.children_of(&device(10)).unwrap() {
            assert_eq!(reference, REF_HAS_COMPONENT);
        }

        for id in 1..=12 {
            let node = space.lookup(&device(id)).expect("device node exists");
            let writable = matches!(id, 11 | 12);
            assert_eq!(node.is_writable(), writable, "node i={id}");
            let is_variable = matches!(id, 2 | 4 | 6 | 7 | 8 | 9 | 11 | 12);
            assert_eq!(node.class() == NodeClass::Variable, is_variable);
            assert_eq!(node.has_value(), is_variable);
        }
        assert!(space.lookup(&device(13)).is_none());
        assert!(space.lookup(&NodeId::numeric(1, 2)).is_none());
    }

    #[test]
    fn published_order_matches_the_replicated_variable_order() {
        let space = AddressSpace::honeypot();
        let ids: Vec<u32> = published_nodes()
            .iter()
            .map(|n| n.as_numeric().expect("numeric").1)
            .collect();
        assert_eq!(ids, [2, 4, 6, 7, 11, 12, 8, 9]);

        let values = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
        space.set_replicated(&values, 1234);
        for (id, expected) in published_nodes().iter().zip(values) {
            assert_eq!(space.read_value(id), Some((expected, 1234)));
        }
    }

    #[test]
    fn cells_round_trip_values_and_reject_valueless_nodes() {
        let space = AddressSpace::honeypot();
        assert!(space.set_value(&device(11), -0.25, 77));
        assert_eq!(space.read_value(&device(11)), Some((-0.25, 77)));
        assert!(!space.set_value(&device(5), 1.0, 0), "object has no cell");
        assert!(space.read_value(&device(5)).is_none());
        assert!(!space.set_value(&device(99), 1.0, 0));
    }

    #[test]
    fn concurrent_reads_always_see_a_consistent_value_stamp_pair() {
        let space = Arc::new(AddressSpace::honeypot());
        let stop = Arc::new(AtomicBool::new(false));
        let yaw = device(6);

        let writer = {
            let space = Arc::clone(&space);
            let stop = Arc::clone(&stop);
            let yaw = yaw.clone();
            std::thread::spawn(move || {
                let mut i: i64 = 0;
                while !stop.load(Ordering::SeqCst) {
                    space.set_value(&yaw, i as f64, 3 * i + 1);
                    i += 1;
                }
                i
            })
        };
        let readers: Vec<_> = (0..2)
            .map(|_| {
                let space = Arc::clone(&space);
                let stop = Arc::clone(&stop);
                let yaw = yaw.clone();
                std::thread::spawn(move || {
                    let mut seen = 0u64;
                    while !stop.load(Ordering::SeqCst) {
                        let (value, stamp) = space.read_value(&yaw).expect("yaw has a cell");
                        assert_eq!(stamp, 3 * (value as i64) + 1, "torn read");
                        seen += 1;
                    }
                    seen
                })
            })
            .collect();

        std::thread::sleep(std::time::Duration::from_millis(150));
        stop.store(true, Ordering::SeqCst);
        let writes = writer.join().expect("writer");
        let reads: u64 = readers.into_iter().map(|r| r.join().expect("reader")).sum();
        assert!(writes > 0 && reads > 0);
    }
}
