// Stand-in for an external sequence-labeling trainer, used by tests and
// the sweep examples. Honors the trainer contract: reads train/valid/test
// record TSVs and writes a prediction TSV for the test set.
//
//   --mode identity   predictions = the test file's own labels
//   --mode empty      predictions = all-O rows with no links

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sfa/annoparse.hpp"

int main(int argc, char** argv) {
  CLI::App app{"stub trainer for sweep tests"};
  std::string mode = "identity";
  std::string train, valid, test, pred, pretrain;
  app.add_option("--mode", mode, "identity | empty");
  app.add_option("--train", train)->required();
  app.add_option("--valid", valid)->required();
  app.add_option("--test", test)->required();
  app.add_option("--pred", pred)->required();
  app.add_option("--pretrain", pretrain);
  CLI11_PARSE(app, argc, argv);

  try {
    // The training data must at least parse; that is all this stub learns.
    (void)sfa::read_records_tsv(train);
    (void)sfa::read_records_tsv(valid);

    if (mode == "identity") {
      std::ifstream in(test, std::ios::binary);
      if (!in) throw sfa::IoError("cannot open " + test);
      std::ofstream out(pred, std::ios::binary);
      out << in.rdbuf();
      return 0;
    }
    if (mode == "empty") {
      const auto rows = sfa::read_records_tsv(test);
      std::ofstream out(pred, std::ios::binary);
      int prev_utt = -1;
      std::string prev_session;
      for (const auto& r : rows) {
        if (!prev_session.empty() &&
            (r.session_id != prev_session || r.utterance_index != prev_utt))
          out << '\n';
        prev_session = r.session_id;
        prev_utt = r.utterance_index;
        std::string surface;
        for (char c : r.surface) {
          if (c == '\\')
            surface += "\\\\";
          else if (c == '\t')
            surface += "\\t";
          else
            surface.push_back(c);
        }
        out << r.session_id << '\t' << r.utterance_index << '\t' << r.token_index
            << '\t' << surface << "\tO\t_\t_\t_\n";
      }
      return 0;
    }
    std::cerr << "unknown mode: " << mode << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "stub trainer failed: " << e.what() << "\n";
    return 2;
  }
}
