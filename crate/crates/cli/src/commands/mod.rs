pub mod fit;
pub mod imaging;
pub mod mesh;
pub mod pipeline;
