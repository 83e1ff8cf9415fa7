"""Convert public SSVEP MAT-file datasets into the toolkit's on-disk format."""

from .convert import ConvertError, convert, verify_roundtrip
from .recipes import RECIPES, ConversionRecipe, recipe_for

__version__ = "0.1.0"
