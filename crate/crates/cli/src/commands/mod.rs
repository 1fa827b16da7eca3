pub mod analyze;
pub mod calibrate;
pub mod conditional;
pub mod selfcheck;
pub mod simulate;
