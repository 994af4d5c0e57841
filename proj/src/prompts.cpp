#include "agentforge/prompts.hpp"

#include <sstream>

namespace agentforge::prompts {

using providers::GenerationPart;
using providers::GenerationRequest;

namespace {

const char* kAnnotationSystem = R"(You are a GUI screenshot analysis expert. You will be provided with:
1. A screenshot of a UI screen (Screen Before) with the action area marked in red
2. The action type performed
3. The resulting screenshot after the action (Screen After)
4. The name of the Android app

Your task is to analyze the elements on the second screenshot (Screen After) ONLY. The first screenshot is provided only as context to help you understand the app's state.

Each element should be output as a dictionary:

{
    "type": "functionality" or "data",
    "label": "A short phrase describing its identifier on this screen",
    "description": "A few sentences describing this element's functionality"
}

The description should be comprehensive and detailed:
- Include the hierarchical location within the app (e.g., which menu, which settings page, which sub-section)
- Explain what this element does at the phone/device level, so that someone reading this description can fully understand the element's role and functionality without seeing the screenshot.

Here are examples showing bad descriptions and their improved versions:

Example 1:
- Bad: "A WiFi toggle that enables or disables WiFi connectivity."
- Reason: Too vague; does not specify location or device-level changes.
- Good: "This toggle under System Settings > Network & Internet > Wi-Fi enables or disables Wi-Fi on the device, allowing the phone to scan for available wireless networks and connect/disconnect from them."

Example 2:
- Bad: "A Reminder option enables users to set a reminder."
- Reason: Too vague; does not explain what scenario it is used for.
- Good: "In the calendar app's event creation/edit screen, this reminder option schedules a notification before the event starts (e.g., 10 minutes in advance), helping the user receive an alert at the chosen lead time."

Output a JSON list only. No markdown, no comments, no extra text. Start with [ and end with ].)";

const char* kSynthesisSystem = R"(You are a GUI explorer. Your goal is to explore a GUI environment and synthesize high-quality, high-difficulty, executable, high-level, multi-step GUI tasks/instructions.

You have already completed the exploration work. You have collected many screenshots from the current GUI environment, the transitions between them, and various functionalities within the corresponding app.

Now, you need to fully associate and imagine based on the following three sources of information to generate long-range, high-level tasks/instructions that are possible within the current app:
1. A recalled screenshot of a specific screen
2. Several screenshots in short-term memory that have transition relationships with this screenshot (screens that can be reached from the current screen)
3. Importantly, some functionalities retrieved from long-term memory that are associated with the current screen (semantically related functionalities from other screens in the same app)

Based on these three sources of information, you should fully associate, imagine, and generate long-range, high-level tasks/instructions that are possible within the current app.

Guidelines

1. The provided screenshots and functionalities are only a portion of your recalled memories serving as context. Your ONLY task is to synthesize clear multi-step GUI instructions. The instructions you synthesize do not need to have direct connections with the current screen or operations, but can be inferred from the context. However, to ensure the difficulty and complexity of generated tasks, you are encouraged to analyze, associate, and combine functionalities from your memories.

2. There are two types of tasks to generate:
- Action tasks: Require performing a series of actions to accomplish a goal. For example: "Set an alarm for tomorrow at 8 AM that repeats every weekday."
- Question-answering tasks: Require performing a series of actions and answering a question related to the environment's content. For example: "In my to-do list, how many tasks need to be completed this Wednesday? Answer the question with a single number."
You should decide which type of task is appropriate to generate based on the context.

3. Synthesized tasks must be clear and explicit. Generated tasks should be specific with sufficient details, so that executors will not feel confused. For example, "Help me create a new event in the calendar" is too broad. It should include concrete configurations, e.g., date, time, title, description, duration, location, etc.

4. Synthesized tasks must be executable. If you want to generate a task that involves operating on app data (for example, deleting an entry in the calendar), you MUST make sure the data you want to operate on is present in the given screenshots.

5. Generated tasks should be diverse. Do not only focus on the app's main functions. Try to cover all functionalities of the app as much as possible, for example, elements or functions in corners of screens, or functionalities you associate from memories.

6. Generated tasks should be long-range. Do not generate single-step tasks such as clicking a button. You are encouraged to generate tasks that require executors to reason, plan, and complete in multiple steps. You can also consider combining different sub-functions or sub-tasks into a long-range task, but ensure reasonableness.

7. Generated tasks should be high-level. Do not generate step-by-step instructions and detailed actions. Instead, integrate multi-step instructions into a high-level intent to increase task difficulty. They should be a single command that contains specific details, rather than step-by-step operations for completing a task.

8. Generated tasks should start from the phone's home screen, not from the currently provided screen. Do not generate tasks that are bound to temporary states of the current interface (for example, a popup dialog that appears).

9. The operating environment is a virtual device with no network connection. Do not generate tasks that require internet connection or login. However, you can freely use data that is already saved in the existing app.

Example Tasks

Here are examples showing bad tasks and their improved versions:

Example 1:
- Bad: "Access and manage the list of all saved Bluetooth devices."
- Reason: Does not specify what "manage" means.
- Good: "View all existing Bluetooth devices, and if any exist, delete all of them."

Example 2:
- Bad: "Add a new recipe to the list using the plus button on the main recipe screen."
- Reason: Does not specify concrete content.
- Good: "In the Broccoli app, add a new recipe for 'Tomato and Egg Stir-fry', set the category to 'Stir-fry', and fill in the description as 'Mom's favorite dish'."

Example 3:
- Bad: "Check the battery usage statistics and enable Battery Saver mode if necessary."
- Reason: "If necessary" will confuse the executor.
- Good: "Write the top three items from battery usage statistics into the Markor app and save it as 'battery_usage_statistics', and enable Battery Saver mode."

Example 4:
- Bad: "Dismiss the voice search connection error by tapping the 'Keyboard' button, then manually type 'The Beatles' in the search bar."
- Reason: Includes a temporary state and assumes starting from the search interface.
- Good: "In the music app, how many songs are included for The Beatles and Taylor Swift respectively? Answer with numbers separated by a comma."

Example 5:
- Bad: "In the Broccoli app, use the search function to find the recipe 'Salmon with Dill Sauce'. Open its details page and answer how many servings it yields."
- Reason: Contains too many specific operations; should be more high-level.
- Good: "In the Broccoli app, how many servings does 'Salmon with Dill Sauce' provide, and what is the total preparation time required?"

Example 6:
- Bad: "In Simple Calendar Pro, navigate to the 'Customize colors' menu, attempt to change the App icon color, and dismiss the warning popup."
- Reason: Contains unnecessary specific operations and temporary states.
- Good: "Set the app color of Simple Calendar Pro to blue."

Example 7:
- Bad: "In the Tasks app, what tasks do I have?"
- Reason: Too vague.
- Good: "In the Tasks app, which tasks due this week are not completed yet? Answer with titles only; if there are multiple, separate them with commas."

Example 8:
- Bad: "In the Audio Recorder app, configure the settings for high-fidelity recording. After entering the app, navigate to the setup menu and change the recording format to Wav, set the sample rate to 48kHz..."
- Reason: Contains too many step-by-step operations.
- Good: "Record an audio file in Wav format with 48kHz sample rate and Stereo channel using Audio Recorder, and save it as test_audio.")";

void append_elements(std::ostringstream& out, const std::vector<std::pair<std::string, std::string>>& elements) {
  int i = 1;
  for (const auto& [kind, description] : elements) {
    out << "  " << i++ << ". \"type\": " << kind << ", \"description\": " << description << "\n";
  }
}

}  // namespace

GenerationRequest make_annotation_request(const std::string& app_name,
                                          const std::string& action_desc,
                                          const std::optional<std::string>& before_ref,
                                          const std::string& after_ref) {
  GenerationRequest req;
  req.system_text = kAnnotationSystem;
  if (before_ref) req.user_parts.push_back(GenerationPart::image_part(*before_ref));
  req.user_parts.push_back(GenerationPart::image_part(after_ref));
  std::ostringstream text;
  text << "App: " << app_name << "\n";
  text << "Action: " << action_desc << "\n\n";
  if (before_ref) {
    text << "The first image is Screen Before (with action area marked in red). "
            "The second image is Screen After. Please analyze the elements on the second image.";
  } else {
    text << "This is the app's initial screen; there is no Screen Before. "
            "The provided image is Screen After. Please analyze the elements on it.";
  }
  req.user_parts.push_back(GenerationPart::text_part(text.str()));
  return req;
}

GenerationRequest make_synthesis_request(const SynthesisPayload& payload) {
  GenerationRequest req;
  req.system_text = kSynthesisSystem;
  req.user_parts.push_back(GenerationPart::image_part(payload.focal.render_ref));
  if (payload.predecessor) req.user_parts.push_back(GenerationPart::image_part(payload.predecessor->render_ref));
  for (const auto& s : payload.successors) req.user_parts.push_back(GenerationPart::image_part(s.render_ref));

  std::ostringstream text;
  text << "## Current Screen\n";
  text << "App: " << payload.app_name << "\n";
  text << "Elements on Current Screen (" << payload.focal.elements.size() << " items):\n";
  append_elements(text, payload.focal.elements);
  text << "\nThese are screens that can transition into the current screen:\n";
  if (payload.predecessor) {
    text << "### Preceding Screen 1\n";
    text << "Elements (" << payload.predecessor->elements.size() << " items):\n";
    append_elements(text, payload.predecessor->elements);
  } else {
    text << "(none available)\n";
  }
  text << "\nThese are screens that can be reached from the current screen:\n";
  if (payload.successors.empty()) {
    text << "(none available)\n";
  }
  for (size_t i = 0; i < payload.successors.size(); ++i) {
    text << "### Associated Screen " << (i + 1) << "\n";
    text << "Elements (" << payload.successors[i].elements.size() << " items):\n";
    append_elements(text, payload.successors[i].elements);
  }
  text << "\n## Related Functionalities from Other Screens (" << payload.long_term.size() << " items)\n";
  text << "These are semantically related functionalities from other screens in the same app:\n";
  for (size_t i = 0; i < payload.long_term.size(); ++i) {
    text << "  " << (i + 1) << ". " << payload.long_term[i] << "\n";
  }
  text << "\n## Your Task\n";
  text << "Based on the above context, carefully analyze and think, then generate 1-3 high-quality GUI tasks. "
          "Each task should be a concise but high-level instruction in English. Output format (JSON array):\n";
  text << "[\n  {\"reasoning\": \"...\", \"task\": \"task instruction 1\"},\n"
          "  {\"reasoning\": \"...\", \"task\": \"task instruction 2\"}\n]\n";
  req.user_parts.push_back(GenerationPart::text_part(text.str()));
  return req;
}

GenerationRequest make_scoring_request(const std::string& app_name, const std::string& task_text) {
  GenerationRequest req;
  req.system_text =
      "You are a strict GUI task reviewer. Rate the given task instruction on three axes - "
      "complexity, clarity, reasonableness - each an integer from 1 to 5. Complexity rewards "
      "multi-step, high-level tasks; clarity penalizes ambiguity; reasonableness penalizes tasks "
      "that cannot be executed in the app. Output a JSON object only: "
      "{\"complexity\": n, \"clarity\": n, \"reasonableness\": n}.";
  std::ostringstream text;
  text << "App: " << app_name << "\n";
  text << "Task: " << task_text << "\n";
  req.user_parts.push_back(GenerationPart::text_part(text.str()));
  return req;
}

std::string render_history_lines(const std::vector<HistoryLine>& recent) {
  std::ostringstream out;
  if (recent.empty()) {
    out << "(no steps yet)\n";
    return out.str();
  }
  for (const auto& line : recent) {
    out << "- t=" << line.t << " thought: " << line.thought << " | action: " << line.action;
    if (line.error) out << " | invalid: " << *line.error;
    out << "\n";
  }
  return out.str();
}

GenerationRequest make_monitor_request(const std::string& instruction,
                                       const std::vector<HistoryLine>& recent,
                                       const std::string& prev_ref,
                                       const std::string& cur_ref) {
  GenerationRequest req;
  req.system_text =
      "You are a GUI execution monitor. Given the task instruction, the learner's recent actions, "
      "and the last two screenshots (before and after the latest action), decide whether the learner "
      "has deviated from productive progress toward completing the task. Output a JSON object only: "
      "{\"deviated\": true|false, \"analysis\": \"...\"}. The analysis must explain the deviation "
      "when deviated is true.";
  req.user_parts.push_back(GenerationPart::image_part(prev_ref));
  req.user_parts.push_back(GenerationPart::image_part(cur_ref));
  std::ostringstream text;
  text << "Task: " << instruction << "\n\nRecent steps:\n" << render_history_lines(recent);
  req.user_parts.push_back(GenerationPart::text_part(text.str()));
  return req;
}

GenerationRequest make_judge_request(const std::string& instruction,
                                     const std::string& final_ref,
                                     const std::optional<std::string>& answer) {
  GenerationRequest req;
  req.system_text =
      "You are a GUI task completion judge. Given the task instruction, the final screenshot, and "
      "the agent's submitted answer (if any), decide whether the task was completed successfully. "
      "Output a JSON object only: {\"success\": true|false}.";
  req.user_parts.push_back(GenerationPart::image_part(final_ref));
  std::ostringstream text;
  text << "Task: " << instruction << "\n";
  if (answer) text << "Submitted answer: " << *answer << "\n";
  req.user_parts.push_back(GenerationPart::text_part(text.str()));
  return req;
}

GenerationRequest make_rewrite_request(const std::string& instruction,
                                       const std::vector<HistoryLine>& recent,
                                       const std::string& obs_ref,
                                       const std::string& action,
                                       const std::string& original_thought) {
  GenerationRequest req;
  req.system_text =
      "You rewrite a GUI agent's step-level chain-of-thought. Given the task instruction, the recent "
      "history, the current screenshot, the action taken at this step, and the original thought, "
      "produce a cleaner first-person thought that justifies the action. Output the rewritten "
      "thought only, as plain text.";
  req.user_parts.push_back(GenerationPart::image_part(obs_ref));
  std::ostringstream text;
  text << "Task: " << instruction << "\n\nRecent steps:\n" << render_history_lines(recent);
  text << "\nAction taken: " << action << "\n";
  text << "Original thought: " << original_thought << "\n";
  req.user_parts.push_back(GenerationPart::text_part(text.str()));
  return req;
}

GenerationRequest make_decompose_request(const std::string& task_text) {
  GenerationRequest req;
  req.system_text =
      "You decompose a GUI task instruction into the atomic functionalities required to complete "
      "it. Each functionality is a short verb phrase such as 'create calendar event' or 'set "
      "title'. Output a JSON array of strings only.";
  req.user_parts.push_back(GenerationPart::text_part("Task: " + task_text + "\n"));
  return req;
}

GenerationRequest make_policy_request(const std::string& instruction,
                                      const std::vector<HistoryLine>& recent,
                                      const std::string& obs_ref,
                                      const std::string& a11y_listing,
                                      const std::optional<std::string>& deviation_analysis) {
  GenerationRequest req;
  req.system_text =
      "You are a GUI agent operating a mobile device. Given the task instruction, the interaction "
      "history, and the current screen, choose the next action. Available actions: click(element), "
      "type(element, text), back, complete, answer(text). Output a JSON object only: "
      "{\"thought\": \"...\", \"action\": {\"kind\": \"click|type|back|complete|answer\", "
      "\"element\": n, \"text\": \"...\"}}.";
  req.user_parts.push_back(GenerationPart::image_part(obs_ref));
  std::ostringstream text;
  text << "Task: " << instruction << "\n\nHistory:\n" << render_history_lines(recent);
  if (deviation_analysis) {
    text << "\nA monitor flagged the execution as deviating: " << *deviation_analysis << "\n";
  }
  text << "\nElements on the current screen:\n" << a11y_listing;
  req.user_parts.push_back(GenerationPart::text_part(text.str()));
  return req;
}

}  // namespace agentforge::prompts
