//! Example inputs shipped inside the binary.

use crate::config::ExampleName;

pub const MDS_MODEL: &str = include_str!("../data/mds.json");
pub const SCHEME1: &str = include_str!("../data/scheme1.json");
pub const SCHEME2: &str = include_str!("../data/scheme2.json");
pub const MDS_PIPELINE: &str = include_str!("../data/mds_pipeline.json");
pub const TIGERSHARC: &str = include_str!("../data/tigersharc.json");
pub const MDS_REGISTRY: &str = include_str!("../data/mds_registry.json");

pub const ALL: [(ExampleName, &str); 6] = [
    (ExampleName::Model, "mds.json"),
    (ExampleName::Scheme1, "scheme1.json"),
    (ExampleName::Scheme2, "scheme2.json"),
    (ExampleName::Pipeline, "mds_pipeline.json"),
    (ExampleName::Bench, "tigersharc.json"),
    (ExampleName::Registry, "mds_registry.json"),
];

pub fn example(name: ExampleName) -> &'static str {
    match name {
        ExampleName::Model => MDS_MODEL,
        ExampleName::Scheme1 => SCHEME1,
        ExampleName::Scheme2 => SCHEME2,
        ExampleName::Pipeline => MDS_PIPELINE,
        ExampleName::Bench => TIGERSHARC,
        ExampleName::Registry => MDS_REGISTRY,
    }
}
