pub mod interp;
pub mod quad;
pub mod roots;
pub mod special;
