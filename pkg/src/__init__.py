# iprelax - relaxation solver, problem catalog, text models, CLI
