//! Analytical memory, latency and area model for `L`-parallel decoders.
//!
//! RAM E holds the error estimate, RAM S the syndrome (two banks for even
//! and odd block rows; the non-layered design keeps both `s` and its
//! updated copy, doubling RAM S), and RAM I the `log2 r`-bit row indices of
//! one column per circulant block.

use std::fmt;

/// Logic cost of the layered design, in XOR-gate equivalents.
pub const LAYERED_LOGIC_XORS: u64 = 3780;
/// Logic cost of the best non-layered design, in XOR-gate equivalents.
pub const NON_LAYERED_LOGIC_XORS: u64 = 5134;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RamSizes {
    pub ram_e: u64,
    pub ram_s: u64,
    pub ram_i: u64,
}

impl RamSizes {
    pub fn total(&self) -> u64 {
        self.ram_e + self.ram_s + self.ram_i
    }
}

fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

pub fn ceil_log2(x: u64) -> u64 {
    assert!(x > 0);
    (u64::BITS - (x - 1).leading_zeros()) as u64
}

/// Bits of each RAM.
pub fn ram_sizes(r: u64, w: u64, l: u64, layered: bool) -> RamSizes {
    assert!(r > 0 && l > 0 && w.is_multiple_of(2));
    let banks = if layered { 2 } else { 4 };
    RamSizes {
        ram_e: ceil_div(2 * r, l) * l,
        ram_s: banks * ceil_div(r, 2 * l) * l,
        ram_i: 2 * ceil_log2(r) * (w / 2),
    }
}

/// Clock cycles: each of the `ceil(2r/L)` column blocks takes a counting
/// pass and a flipping pass of `d` cycles each.
pub fn latency(r: u64, w: u64, l: u64) -> u64 {
    ceil_div(2 * r, l) * w
}

/// Memory bits at 0.75 XOR each, rounded to nearest (halves up), plus logic.
pub fn total_area(mem_bits: u64, logic_xors: u64) -> u64 {
    (3 * mem_bits + 2) / 4 + logic_xors
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostReport {
    pub r: u64,
    pub w: u64,
    pub l: u64,
    pub layered: bool,
    pub rams: RamSizes,
    pub total_mem_bits: u64,
    pub logic_xors: u64,
    pub total_area_xors: u64,
    pub latency_cycles: u64,
}

impl CostReport {
    /// `latency_iterations` multiplies the tabulated latency, for reading it
    /// as a per-iteration figure; `None` keeps the tabulated value.
    pub fn new(r: u64, w: u64, l: u64, layered: bool, logic_xors: u64, latency_iterations: Option<u64>) -> Self {
        let rams = ram_sizes(r, w, l, layered);
        let total_mem_bits = rams.total();
        Self {
            r,
            w,
            l,
            layered,
            rams,
            total_mem_bits,
            logic_xors,
            total_area_xors: total_area(total_mem_bits, logic_xors),
            latency_cycles: latency(r, w, l) * latency_iterations.unwrap_or(1),
        }
    }

    /// Defaults for the logic cost of each design.
    pub fn with_default_logic(r: u64, w: u64, l: u64, layered: bool) -> Self {
        let logic = if layered { LAYERED_LOGIC_XORS } else { NON_LAYERED_LOGIC_XORS };
        Self::new(r, w, l, layered, logic, None)
    }

    fn rows(&self) -> [(&'static str, u64); 8] {
        [
            ("r value", self.r),
            ("RAM E", self.rams.ram_e),
            ("RAM S", self.rams.ram_s),
            ("RAM I", self.rams.ram_i),
            ("Total memory (bits)", self.total_mem_bits),
            ("Logic (# of XORs)", self.logic_xors),
            ("Total area (# of XORs)", self.total_area_xors),
            ("Latency (# of clk cycles)", self.latency_cycles),
        ]
    }
}

const LABEL_WIDTH: usize = 28;

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let design = if self.layered { "layered" } else { "non-layered" };
        writeln!(f, "{:<LABEL_WIDTH$}{design} (L={})", "design", self.l)?;
        for (label, value) in self.rows() {
            writeln!(f, "{label:<LABEL_WIDTH$}{value}")?;
        }
        Ok(())
    }
}

/// Two designs side by side, with the first normalised to the second on
/// memory, area and latency.
pub struct CostComparison {
    pub proposed: CostReport,
    pub baseline: CostReport,
}

impl CostComparison {
    pub fn memory_ratio(&self) -> f64 {
        self.proposed.total_mem_bits as f64 / self.baseline.total_mem_bits as f64
    }

    pub fn area_ratio(&self) -> f64 {
        self.proposed.total_area_xors as f64 / self.baseline.total_area_xors as f64
    }

    pub fn latency_ratio(&self) -> f64 {
        self.proposed.latency_cycles as f64 / self.baseline.latency_cycles as f64
    }
}

impl fmt::Display for CostComparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |c: &CostReport| if c.layered { "layered" } else { "non-layered" };
        writeln!(
            f,
            "{:<LABEL_WIDTH$}{:<16}{}",
            "design",
            name(&self.proposed),
            name(&self.baseline)
        )?;
        for ((label, a), (_, b)) in self.proposed.rows().into_iter().zip(self.baseline.rows()) {
            writeln!(f, "{label:<LABEL_WIDTH$}{a:<16}{b}")?;
        }
        writeln!(f, "{:<LABEL_WIDTH$}{:<16.2}1", "Memory (normalized)", self.memory_ratio())?;
        writeln!(f, "{:<LABEL_WIDTH$}{:<16.2}1", "Area (normalized)", self.area_ratio())?;
        writeln!(f, "{:<LABEL_WIDTH$}{:<16.3}1", "Latency (normalized)", self.latency_ratio())
    }
}
