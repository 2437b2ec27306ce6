mod properties;
mod simulation_laws;
