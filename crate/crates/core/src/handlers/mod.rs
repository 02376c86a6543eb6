//! Built-in handlers for the module system: module environments, import
//! commands, symbol declarations, and definitions.

pub mod definition;
pub mod importmodule;
pub mod module;
pub mod scan;
pub mod symdef;

pub use scan::{ImportDecl, ModuleDecl, SymbolDecl};

use crate::error::Result;
use crate::registry::Registry;

pub fn install_builtins(registry: &mut Registry) -> Result<()> {
    registry.register(Box::new(module::ModuleHandler))?;
    registry.register(Box::new(importmodule::ImportModuleHandler))?;
    registry.register(Box::new(symdef::SymdefHandler))?;
    registry.register(Box::new(definition::DefinitionHandler))?;
    Ok(())
}
