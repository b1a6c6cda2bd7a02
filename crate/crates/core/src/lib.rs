pub mod angular;
pub mod designs;
pub mod error;
pub mod fft;
pub mod frame;
pub mod io;
pub mod quadrature;
pub mod sphmath;
pub mod steering;
pub mod validation;

pub use error::{Error, Result};

// The guide's code blocks run as doctests, one module per chapter.
#[cfg(doctest)]
pub mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/harmonics.md")]
    pub mod harmonics {}
    #[doc = include_str!("../../../book/src/designs.md")]
    pub mod designs {}
    #[doc = include_str!("../../../book/src/banks.md")]
    pub mod banks {}
    #[doc = include_str!("../../../book/src/frame.md")]
    pub mod frame {}
    #[doc = include_str!("../../../book/src/steering.md")]
    pub mod steering {}
    #[doc = include_str!("../../../book/src/localization.md")]
    pub mod localization {}
    #[doc = include_str!("../../../book/src/files.md")]
    pub mod files {}
}
