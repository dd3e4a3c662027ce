pub mod analysis;
pub mod bases;
pub mod cli;
pub mod error;
pub mod measurement;
mod par;
pub mod protocols;
pub mod qcore;
pub mod resource;
pub mod verify;
