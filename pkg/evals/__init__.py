# Package de evaluación: reproducción de las tablas de recuperación
