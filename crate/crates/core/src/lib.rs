pub mod admin;
pub mod behavior;
pub mod disclosure;
pub mod gateway;
pub mod policy;
pub mod sensitivity;
pub mod trust;
