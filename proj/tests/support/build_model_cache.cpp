#include "model_cache.hpp"

#include <iostream>

int main() {
    try {
        const auto& models = skillplan::testing::cached_library();
        std::cout << models.all().size() << " models in "
                  << skillplan::testing::cache_directory(skillplan::testing::test_library_config()) << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
