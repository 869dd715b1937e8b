pub mod data;
pub mod featuremap;
pub mod kernels;
pub mod metrics;
pub mod ocsvm;
pub mod quantum;
pub mod seeding;
pub mod tomography;
