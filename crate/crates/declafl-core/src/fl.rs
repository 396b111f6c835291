//! Placeholder
pub struct RankedList;
pub struct SuspFormula;
pub struct Technique;
