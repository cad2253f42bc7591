#include "app.hpp"

int main(int argc, char** argv) { return billiard::cli::dispatch(argc, argv); }
