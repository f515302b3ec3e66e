pub mod valued_field;
pub mod sl2;
pub mod bt_tree;
pub mod word;
pub mod reduction;
pub mod pingpong;
pub mod amalgam;
