# utils/constants.py

# Escala de los ratings: gamma = exp(R / DEFAULT_SCALE)
DEFAULT_SCALE = 400.0

# Prior gaussiano de los ratings base
DEFAULT_BASE_MEAN = 1000.0
DEFAULT_BASE_SIGMA = 400.0

# Prior por defecto de los coeficientes compartidos (alpha) si el spec no lo fija
DEFAULT_SHARED_SIGMA = 400.0

# Recorte de probabilidades en la pérdida logística
PROB_CLAMP = 1e-15

# Optimizador
DEFAULT_MAX_ITERATIONS = 1000
DEFAULT_GRADIENT_TOLERANCE = 1e-7

# Validación cruzada
DEFAULT_SIGMA_GRID = (10.0, 20.0, 40.0, 80.0, 160.0, 320.0)
DEFAULT_CV_FOLDS = 5

# Informes
DEFAULT_ANCHOR_VALUE = 1114.0
DEFAULT_RESAMPLES = 100
