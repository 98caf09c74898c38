# Tests for PintGlass package
