pub mod color;
pub mod dataio;
pub mod geodata;
pub mod scales;
pub mod scene;
pub mod labels;
pub mod designspace;
pub mod icons;
pub mod basemap;
pub mod encode;
pub mod highlight;
pub mod pipeline;
pub mod gallery;
