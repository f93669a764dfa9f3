pub mod bcg;
pub mod cut;
pub mod error;
pub mod fixtures;
pub mod instance;
pub mod labeling;
pub mod lp;
pub mod master;
pub mod network;
pub mod oracle;
pub mod pattern;
pub mod plan;
pub mod report;
pub mod route;
pub mod seq;
pub mod subproblem;
