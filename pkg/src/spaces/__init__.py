# Measure, function and Banach spaces
