// Loads the demo resources, derives a few words, analyzes one back and
// generates some fresh roots.
#include <iostream>

#include "forge/analyze.hpp"
#include "forge/lexicon.hpp"
#include "forge/phonology.hpp"
#include "forge/rules.hpp"

int main() {
    namespace fs = std::filesystem;
    fs::path demo = fs::path(FORGE_DATA_DIR) / "demo";
    try {
        auto rc = forge::RuleCascade::load(demo / "camlang.rules");
        auto lx = forge::Lexicon::load(demo / "lexicon.tsv");

        for (const char* uf : {"cak -mA4", "kityb + cog", "nos =ṇA", "müś -m= jer"})
            std::cout << uf << "  ->  " << forge::generate(uf, rc).text << '\n';

        auto sf = forge::generate("lI= x= cew -RED -mA4 -s =jUr", rc, true);
        std::cout << "\nlichéwcymyśür derivation:\n";
        for (auto& t : sf.trace) std::cout << "  " << t.rule_id << ": " << t.before << " -> " << t.after << '\n';

        std::cout << "\nanalyses of 'myvá ghöt':\n";
        for (auto& uf : forge::analyze("myvá ghöt", rc, lx))
            std::cout << "  " << uf.notation() << "   " << forge::gloss(uf, lx, forge::GlossStyle::compact) << '\n';

        auto inv = forge::PhonemeInventory::load(demo / "inventory.tsv");
        auto tables = forge::load_tables(demo / "bi.tables");
        std::cout << "\nroots:";
        for (auto& r : forge::generate_root(inv, tables, forge::SyllableShape::bisyllabic, 8, 42))
            std::cout << ' ' << r.text();
        std::cout << '\n';
    } catch (const forge::Error& e) {
        std::cerr << "error: " << forge::kind_name(e.kind()) << ": " << e.what() << '\n';
        return 1;
    }
}
