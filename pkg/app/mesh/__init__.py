"""Triangle meshes: connectivity, reference maps, quadrature, generators and file I/O."""
