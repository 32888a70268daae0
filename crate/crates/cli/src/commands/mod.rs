pub mod clean;
pub mod curves;
pub mod demo;
pub mod demux;
pub mod separate;
pub mod stokes;
pub mod synth;
