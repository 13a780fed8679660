pub mod monolith;
pub mod oracle;
