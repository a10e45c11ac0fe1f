# Matrix operators and norm computation
