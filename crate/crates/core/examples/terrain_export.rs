//! Print each task's terrain as JSON along with its sensor layout.

use voxel_coevo::tasks::{make_task, TaskKind};

fn main() -> voxel_coevo::Result<()> {
    for kind in TaskKind::ALL {
        let task = make_task(kind);
        println!("== {kind}: horizon {}, {} sensor inputs", task.horizon, task.input_count());
        for (name, width) in task.sensor_layout() {
            println!("   {name:<16} {width}");
        }
        let json = serde_json::to_string(task.terrain())?;
        let shown: String = json.chars().take(160).collect();
        println!("   terrain {shown}{}", if json.len() > 160 { " ..." } else { "" });
    }
    Ok(())
}
