pub mod scheme;
pub mod system;
pub mod strategy;
pub mod engine;
pub mod oracle;
pub mod search;
pub mod io;
pub mod slp;
pub mod cli;
