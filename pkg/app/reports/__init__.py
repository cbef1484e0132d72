"""Report generators: JSON first, then CSV, Excel and VTK renderings."""
