pub mod bench;
pub mod cli;
pub mod experiment;
pub mod harvest;
pub mod model;
pub mod morph;
pub mod numgrad;
pub mod quality;
pub mod synth;
