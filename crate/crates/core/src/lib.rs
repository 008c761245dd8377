pub mod alignment;
pub mod event_log;
pub mod incremental;
pub mod inductive_miner;
pub mod petri_net;
pub mod process_tree;
