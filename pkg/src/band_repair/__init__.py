# Spectral band repair: masked-conditional diffusion with physics-guided sampling
