#![allow(dead_code)]

pub mod props;
pub mod sandwich;
